#include "icc/airmodel.hpp"

#include "icc/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace icc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

ComplexMatrix antenna_correlation(int m, double rho) {
    ComplexMatrix r(m, m);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            r(p, q) = std::pow(rho, std::abs(p - q));
    return r;
}

std::vector<std::vector<cdouble>> draw_sensing_channel(const ScenarioConfig& cfg,
                                                       RngStream& stream) {
    ComplexMatrix cov = antenna_correlation(cfg.m, cfg.rho);
    for (auto& z : cov.data()) z *= cfg.sigma_h2;
    const ComplexMatrix l = cholesky(cov);
    std::vector<std::vector<cdouble>> h(static_cast<size_t>(cfg.k));
    for (int k = 0; k < cfg.k; ++k) {
        std::vector<cdouble> w(static_cast<size_t>(cfg.m));
        for (auto& z : w) z = stream.standard_complex_gaussian();
        std::vector<cdouble> hk(static_cast<size_t>(cfg.m), cdouble(0.0, 0.0));
        for (int i = 0; i < cfg.m; ++i)
            for (int j = 0; j <= i; ++j) hk[i] += l(i, j) * w[j];
        h[static_cast<size_t>(k)] = std::move(hk);
    }
    return h;
}

CovarianceSample generate_slot(const ScenarioConfig& cfg, int label, RngStream& stream) {
    if (label != 0 && label != 1)
        throw std::invalid_argument("generate_slot: label must be 0 or 1");
    const int m = cfg.m, n = cfg.n, kk = cfg.k;

    std::vector<std::vector<cdouble>> h;
    if (label == 1) h = draw_sensing_channel(cfg, stream);

    const double sig_s = std::sqrt(cfg.sigma_s2);
    std::vector<double> sig_u(static_cast<size_t>(kk));
    for (int k = 0; k < kk; ++k) sig_u[k] = std::sqrt(cfg.sigma_u2_sense_for(k));

    CovarianceSample out;
    out.label = label;
    out.r.assign(static_cast<size_t>(kk), ComplexMatrix(m, m));

    std::vector<cdouble> x(static_cast<size_t>(m));
    for (int t = 0; t < n; ++t) {
        cdouble s = 0.0;
        if (label == 1) s = sig_s * stream.standard_complex_gaussian();
        for (int k = 0; k < kk; ++k) {
            for (int p = 0; p < m; ++p) {
                cdouble v = sig_u[k] * stream.standard_complex_gaussian();
                if (label == 1) v += h[k][p] * s;
                x[p] = v;
            }
            ComplexMatrix& r = out.r[k];
            for (int p = 0; p < m; ++p)
                for (int q = p; q < m; ++q)
                    r(p, q) += x[p] * std::conj(x[q]);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int k = 0; k < kk; ++k) {
        ComplexMatrix& r = out.r[k];
        for (int p = 0; p < m; ++p) {
            for (int q = p; q < m; ++q) {
                r(p, q) *= inv_n;
                if (q != p) r(q, p) = std::conj(r(p, q));
            }
            r(p, p) = cdouble(r(p, p).real(), 0.0);
        }
    }
    return out;
}

cdouble estimate_channel(cdouble h_true, double iota, RngStream& stream) {
    if (iota == 0.0)
        throw std::invalid_argument("estimate_channel: iota = 0 leaves the estimate undefined");
    const double err = std::sqrt(1.0 - iota * iota);
    const cdouble v = stream.standard_complex_gaussian();
    return (h_true - err * v) / iota;
}

cdouble draw_reporting_fade(const ScenarioConfig& cfg, RngStream& stream) {
    const double theta = kTwoPi * stream.uniform();
    const cdouble los(std::cos(theta), std::sin(theta));
    if (std::isinf(cfg.k_factor_db)) {
        if (cfg.k_factor_db > 0.0) {
            stream.standard_complex_gaussian();  // keep the draw count fixed
            return los;
        }
        return stream.standard_complex_gaussian();
    }
    const double kr = std::pow(10.0, cfg.k_factor_db / 10.0);
    const cdouble w = stream.standard_complex_gaussian();
    return std::sqrt(kr / (kr + 1.0)) * los + std::sqrt(1.0 / (kr + 1.0)) * w;
}

ChannelDraw draw_precoded_link(const ScenarioConfig& cfg, int sensor, RngStream& stream,
                               int* redraws) {
    if (sensor < 0 || sensor >= cfg.k)
        throw std::invalid_argument("draw_precoded_link: sensor index out of range");
    const double d = cfg.distances[static_cast<size_t>(sensor)];
    const double d_neg = std::pow(d, -cfg.nu / 2.0);
    const double d_pos = std::pow(d, cfg.nu / 2.0);
    const double sqrt_kappa = std::sqrt(cfg.kappa);

    ChannelDraw out;
    for (;;) {
        out.h_true = draw_reporting_fade(cfg, stream);
        out.h_est = estimate_channel(out.h_true, cfg.iota, stream);
        if (std::abs(out.h_est) >= 1e-12) break;
        if (redraws) ++(*redraws);
    }
    const cdouble ratio = (out.h_true * std::conj(out.h_est)) / std::norm(out.h_est);
    out.gain = (d_neg * d_pos) * sqrt_kappa * ratio;
    return out;
}

namespace {

void check_symbol_block(const std::vector<std::vector<cdouble>>& ys, const ScenarioConfig& cfg) {
    if (static_cast<int>(ys.size()) != cfg.k)
        throw std::invalid_argument("report: need one symbol vector per sensor");
    for (size_t k = 1; k < ys.size(); ++k)
        if (ys[k].size() != ys[0].size())
            throw std::invalid_argument("report: sensors disagree on symbol count");
    if (ys.empty() || ys[0].empty())
        throw std::invalid_argument("report: empty symbol block");
}

} // namespace

ReportedSymbols report_orthogonal(const std::vector<std::vector<cdouble>>& ys,
                                  const ScenarioConfig& cfg, RngStream& stream) {
    check_symbol_block(ys, cfg);
    const size_t d = ys[0].size();
    const double sig = std::sqrt(cfg.sigma_u2_report);

    ReportedSymbols out;
    out.channel_draws.resize(static_cast<size_t>(cfg.k));
    for (int k = 0; k < cfg.k; ++k)
        out.channel_draws[k] = draw_precoded_link(cfg, k, stream, &out.deep_fade_redraws);

    std::vector<std::vector<cdouble>> z(static_cast<size_t>(cfg.k),
                                        std::vector<cdouble>(d));
    for (int k = 0; k < cfg.k; ++k) {
        const cdouble g = out.channel_draws[k].gain;
        for (size_t i = 0; i < d; ++i)
            z[k][i] = g * ys[k][i] + sig * stream.standard_complex_gaussian();
    }
    out.per_sensor = std::move(z);
    return out;
}

ReportedSymbols report_aircomp(const std::vector<std::vector<cdouble>>& ys,
                               const ScenarioConfig& cfg, RngStream& stream) {
    check_symbol_block(ys, cfg);
    const size_t d = ys[0].size();
    const double sig = std::sqrt(cfg.sigma_u2_report);
    const double inv_k = 1.0 / static_cast<double>(cfg.k);

    ReportedSymbols out;
    out.channel_draws.resize(static_cast<size_t>(cfg.k));
    for (int k = 0; k < cfg.k; ++k)
        out.channel_draws[k] = draw_precoded_link(cfg, k, stream, &out.deep_fade_redraws);

    std::vector<cdouble> z(d, cdouble(0.0, 0.0));
    for (int k = 0; k < cfg.k; ++k) {
        const cdouble g = out.channel_draws[k].gain;
        for (size_t i = 0; i < d; ++i) z[i] += g * ys[k][i];
    }
    // The aggregate is averaged; the receiver noise enters once, unscaled.
    for (size_t i = 0; i < d; ++i)
        z[i] = inv_k * z[i] + sig * stream.standard_complex_gaussian();
    out.aggregated = std::move(z);
    return out;
}

std::vector<uint8_t> bpsk_channel(const std::vector<uint8_t>& bits, const ScenarioConfig& cfg,
                                  RngStream& stream, double distance) {
    if (!(distance > 0.0))
        throw std::invalid_argument("bpsk_channel: distance must be positive");
    const double d_neg = std::pow(distance, -cfg.nu / 2.0);
    const double d_pos = std::pow(distance, cfg.nu / 2.0);
    const double sqrt_kappa = std::sqrt(cfg.kappa);
    const double sig = std::sqrt(cfg.sigma_u2_report);

    std::vector<uint8_t> out(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) throw std::invalid_argument("bpsk_channel: bits must be 0 or 1");
        cdouble h_true, h_est;
        for (;;) {
            h_true = draw_reporting_fade(cfg, stream);
            h_est = estimate_channel(h_true, cfg.iota, stream);
            if (std::abs(h_est) >= 1e-12) break;
        }
        const cdouble ratio = (h_true * std::conj(h_est)) / std::norm(h_est);
        const cdouble gain = (d_neg * d_pos) * sqrt_kappa * ratio;
        const double tx = bits[i] ? 1.0 : -1.0;
        const cdouble z = gain * tx + sig * stream.standard_complex_gaussian();
        out[i] = z.real() > 0.0 ? 1 : 0;
    }
    return out;
}

IsBerResult ber_importance_sampled(const ScenarioConfig& cfg, long long draws,
                                   RngStream& stream) {
    if (draws < 2) throw std::invalid_argument("ber_importance_sampled: need at least 2 draws");
    if (cfg.iota != 1.0 || !(std::isinf(cfg.k_factor_db) && cfg.k_factor_db > 0.0))
        throw std::invalid_argument(
            "ber_importance_sampled: defined for the ideal link (iota = 1, k_factor_db = +inf)");
    if (!(cfg.sigma_u2_report > 0.0))
        throw std::invalid_argument("ber_importance_sampled: noiseless link has no error rate");

    const double a = std::sqrt(cfg.kappa);         // composite amplitude after precoding
    const double s = std::sqrt(cfg.sigma_u2_report / 2.0);  // in-phase noise deviation
    const double inv_2s2 = 1.0 / (2.0 * s * s);

    // Sample the in-phase noise from N(-+a, s^2) so error events dominate the
    // draw, and unweight with the exact likelihood ratio.
    double sum = 0.0, sum_sq = 0.0;
    for (long long i = 0; i < draws; ++i) {
        const int bit = stream.uniform() < 0.5 ? 0 : 1;
        const double xi = stream.standard_normal();
        double t = 0.0;
        if (bit == 1) {
            const double x = -a + s * xi;  // tilted noise
            if (a + x < 0.0) t = std::exp((2.0 * a * x + a * a) * inv_2s2);
        } else {
            const double x = a + s * xi;
            if (-a + x >= 0.0) t = std::exp((-2.0 * a * x + a * a) * inv_2s2);
        }
        sum += t;
        sum_sq += t * t;
    }
    const double n = static_cast<double>(draws);
    IsBerResult r;
    r.ber = sum / n;
    const double var = (sum_sq / n - r.ber * r.ber) / (n - 1.0) * n;  // population est
    r.stderr_is = std::sqrt(std::max(var, 0.0) / n);
    const double p = r.ber;
    r.equivalent_bits = r.stderr_is > 0.0 ? p * (1.0 - p) / (r.stderr_is * r.stderr_is) : 0.0;
    return r;
}

} // namespace icc
