#pragma once

#include "icc/airmodel.hpp"
#include "icc/rng.hpp"
#include "icc/scenario.hpp"

#include <cstdint>
#include <vector>

namespace icc {

/// Uniform scalar quantizer over [lo, hi). Code c decodes to the cell
/// midpoint lo + (c + 0.5) (hi - lo) / 2^bits.
struct QuantizerSpec {
    int bits = 8;
    double lo = 0.0;
    double hi = 1.0;

    void validate() const;
    uint32_t encode(double t) const;  // clamps into range first
    double decode(uint32_t code) const;
    std::vector<uint8_t> to_bits(uint32_t code) const;  // MSB first
    uint32_t from_bits(const std::vector<uint8_t>& bits) const;
};

struct QuantizeDiag {
    long long clamped_lo = 0;
    long long clamped_hi = 0;
};

/// Majority vote: 1 iff at least ceil((K+1)/2) of the received bits are 1.
int hdf_fuse(const std::vector<uint8_t>& bits);

/// Equal-gain soft combination.
double sdf_fuse(const std::vector<double>& stats);

/// One soft statistic through the reporting chain: clamp, quantize,
/// transmit the code MSB-first over BPSK, decode at the fusion center.
double quantize_transmit(double t, const QuantizerSpec& q, const ScenarioConfig& cfg,
                         RngStream& stream, double distance = 1.0,
                         QuantizeDiag* diag = nullptr);

/// Closed-form majority-vote detection probability over a binary
/// symmetric reporting channel with crossover Q(sqrt(2 * 10^(snr/10))):
/// each sensor is correct locally with probability p_local.
double hdf_theoretical_pd(double p_local, double snr_report_db, int k);

/// Crossover probability of the ideal reporting link at the given SNR.
double bpsk_theoretical_ber(double snr_report_db);

} // namespace icc
