#pragma once

#include "icc/complex_matrix.hpp"
#include "icc/rng.hpp"
#include "icc/scenario.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace icc {

/// One sensing slot: per-sensor sample covariances plus the true label
/// (1 when the primary signal was present).
struct CovarianceSample {
    std::vector<ComplexMatrix> r;  // K matrices, each M x M
    int label = 0;
};

/// Realized reporting link for one sensor: true fade, the estimate the
/// precoder used, and the resulting composite gain (path loss, fade and
/// precoder combined).
struct ChannelDraw {
    cdouble h_true{};
    cdouble h_est{};
    cdouble gain{};
};

/// Output of the reporting channel. Exactly one of per_sensor (orthogonal
/// subchannels) or aggregated (over-the-air sum) is populated.
struct ReportedSymbols {
    std::optional<std::vector<std::vector<cdouble>>> per_sensor;  // K x D
    std::optional<std::vector<cdouble>> aggregated;               // D
    std::vector<ChannelDraw> channel_draws;                       // K
    int deep_fade_redraws = 0;
};

struct IsBerResult {
    double ber = 0.0;
    double stderr_is = 0.0;              // standard error of the estimate
    double equivalent_bits = 0.0;        // direct-simulation bits of equal precision
};

/// Antenna correlation matrix [R]_{p,q} = rho^|p-q|.
ComplexMatrix antenna_correlation(int m, double rho);

/// Sensing-channel draws for all K sensors: h_k ~ CN(0, sigma_h2 * R).
std::vector<std::vector<cdouble>> draw_sensing_channel(const ScenarioConfig& cfg,
                                                       RngStream& stream);

/// Simulate one slot under the given hypothesis and form the per-sensor
/// sample covariances (1/N) sum x x^H. The primary waveform is shared
/// across sensors; fades are constant within the slot.
CovarianceSample generate_slot(const ScenarioConfig& cfg, int label, RngStream& stream);

/// Recover the estimate h_bar consistent with the true fade under
/// estimation quality iota: h_true = iota*h_bar + sqrt(1-iota^2)*v.
/// Throws for iota = 0 (nothing to invert).
cdouble estimate_channel(cdouble h_true, double iota, RngStream& stream);

/// One Rician reporting fade with K-factor cfg.k_factor_db
/// (unit mean power; +inf dB degenerates to a pure random phase,
/// -inf dB to pure Rayleigh).
cdouble draw_reporting_fade(const ScenarioConfig& cfg, RngStream& stream);

/// Fade + estimate + truncated channel inversion for one sensor,
/// redrawing on |h_est| < 1e-12 and counting the redraws.
ChannelDraw draw_precoded_link(const ScenarioConfig& cfg, int sensor, RngStream& stream,
                               int* redraws = nullptr);

/// Orthogonal reporting: each sensor's symbol vector rides its own
/// subchannel with its own additive noise.
ReportedSymbols report_orthogonal(const std::vector<std::vector<cdouble>>& ys,
                                  const ScenarioConfig& cfg, RngStream& stream);

/// Over-the-air aggregation: (1/K) sum of precoded sensor vectors, with
/// one additive noise vector applied to the aggregate (not averaged).
ReportedSymbols report_aircomp(const std::vector<std::vector<cdouble>>& ys,
                               const ScenarioConfig& cfg, RngStream& stream);

/// BPSK over the precoded reporting link with hard detection,
/// one fresh fade per bit.
std::vector<uint8_t> bpsk_channel(const std::vector<uint8_t>& bits, const ScenarioConfig& cfg,
                                  RngStream& stream, double distance = 1.0);

/// Importance-sampled BER of the ideal precoded link (iota = 1,
/// K-factor +inf), tilted so deep tails are measurable with modest draw
/// counts. equivalent_bits reports the direct-simulation sample size the
/// achieved variance corresponds to.
IsBerResult ber_importance_sampled(const ScenarioConfig& cfg, long long draws,
                                   RngStream& stream);

} // namespace icc
