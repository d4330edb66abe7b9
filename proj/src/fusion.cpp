#include "icc/fusion.hpp"

#include "icc/linalg.hpp"
#include "icc/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace icc {

void QuantizerSpec::validate() const {
    if (bits < 1 || bits > 24) throw std::invalid_argument("quantizer: bits must lie in [1,24]");
    if (!(hi > lo)) throw std::invalid_argument("quantizer: hi must exceed lo");
}

uint32_t QuantizerSpec::encode(double t) const {
    validate();
    const uint32_t levels = 1u << bits;
    if (t <= lo) return 0;
    if (t >= hi) return levels - 1;
    const double step = (hi - lo) / static_cast<double>(levels);
    uint32_t c = static_cast<uint32_t>((t - lo) / step);
    if (c > levels - 1) c = levels - 1;
    return c;
}

double QuantizerSpec::decode(uint32_t code) const {
    validate();
    const uint32_t levels = 1u << bits;
    if (code >= levels) throw std::invalid_argument("quantizer: code out of range");
    return lo + (static_cast<double>(code) + 0.5) * (hi - lo) / static_cast<double>(levels);
}

std::vector<uint8_t> QuantizerSpec::to_bits(uint32_t code) const {
    std::vector<uint8_t> b(static_cast<size_t>(bits));
    for (int i = 0; i < bits; ++i)
        b[static_cast<size_t>(i)] = static_cast<uint8_t>((code >> (bits - 1 - i)) & 1u);
    return b;
}

uint32_t QuantizerSpec::from_bits(const std::vector<uint8_t>& bv) const {
    if (static_cast<int>(bv.size()) != bits)
        throw std::invalid_argument("quantizer: bit count mismatch");
    uint32_t c = 0;
    for (int i = 0; i < bits; ++i) c = (c << 1) | (bv[static_cast<size_t>(i)] & 1u);
    return c;
}

int hdf_fuse(const std::vector<uint8_t>& bits) {
    if (bits.empty()) throw std::invalid_argument("hdf_fuse: empty vote");
    int count = 0;
    for (uint8_t b : bits) {
        if (b > 1) throw std::invalid_argument("hdf_fuse: votes must be 0 or 1");
        count += b;
    }
    const int k = static_cast<int>(bits.size());
    const int need = (k + 2) / 2;  // ceil((k+1)/2)
    return count >= need ? 1 : 0;
}

double sdf_fuse(const std::vector<double>& stats) {
    if (stats.empty()) throw std::invalid_argument("sdf_fuse: empty input");
    double acc = 0.0;
    for (double t : stats) acc += t;
    return acc;
}

double quantize_transmit(double t, const QuantizerSpec& q, const ScenarioConfig& cfg,
                         RngStream& stream, double distance, QuantizeDiag* diag) {
    q.validate();
    if (diag) {
        if (t < q.lo) ++diag->clamped_lo;
        if (t > q.hi) ++diag->clamped_hi;
    }
    const uint32_t code = q.encode(t);
    const std::vector<uint8_t> sent = q.to_bits(code);
    const std::vector<uint8_t> got = bpsk_channel(sent, cfg, stream, distance);
    return q.decode(q.from_bits(got));
}

double bpsk_theoretical_ber(double snr_report_db) {
    return q_function(std::sqrt(2.0 * std::pow(10.0, snr_report_db / 10.0)));
}

double hdf_theoretical_pd(double p_local, double snr_report_db, int k) {
    if (k < 1) throw std::invalid_argument("hdf_theoretical_pd: k must be at least 1");
    if (p_local < 0.0 || p_local > 1.0)
        throw std::invalid_argument("hdf_theoretical_pd: p_local must lie in [0,1]");
    const double pe = bpsk_theoretical_ber(snr_report_db);
    const double p = p_local * (1.0 - pe) + (1.0 - p_local) * pe;
    const int need = (k + 2) / 2;
    return binomial_tail(k, p, need);
}

} // namespace icc
