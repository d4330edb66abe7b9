#include "icc/simplified.hpp"

#include "icc/airmodel.hpp"
#include "icc/detectors.hpp"
#include "icc/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icc {

namespace {

double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

SimplifiedModel make_simplified(int m, int l, std::vector<std::vector<double>> kernels,
                                std::vector<double> theta) {
    if (m < 2) throw std::invalid_argument("simplified: m must be at least 2");
    if (l < 1 || l > m) throw std::invalid_argument("simplified: kernel size must lie in [1, m]");
    if (kernels.empty()) throw std::invalid_argument("simplified: no kernels");
    if (kernels.size() != theta.size())
        throw std::invalid_argument("simplified: one theta per kernel required");
    for (const auto& k : kernels)
        if (static_cast<int>(k.size()) != l * l)
            throw std::invalid_argument("simplified: kernel entries must be l*l");

    SimplifiedModel model;
    model.m = m;
    model.l = l;
    model.kernels = std::move(kernels);
    model.theta = std::move(theta);

    const int out = m - l + 1;
    const auto& ks = model.kernels;
    model.eta.assign(ks.size(), std::vector<double>(static_cast<size_t>(out) * out, 0.0));
    model.zeta.assign(ks.size(), 0.0);
    for (size_t lam = 0; lam < ks.size(); ++lam) {
        double pooled = 0.0;
        for (int i = 1; i <= out; ++i) {
            for (int j = 1; j <= out; ++j) {
                // pre-activation at (i, j): only input diagonal cells d
                // covered by the kernel window contribute, each through
                // the flipped kernel tap (l - i0, l - j0), 1-based.
                double acc = 0.0;
                for (int d = 1; d <= m; ++d) {
                    const int i0 = d - i, j0 = d - j;
                    if (i0 < 0 || i0 > l - 1 || j0 < 0 || j0 > l - 1) continue;
                    acc += ks[lam][static_cast<size_t>(l - 1 - i0) * l + (l - 1 - j0)];
                }
                model.eta[lam][static_cast<size_t>(i - 1) * out + (j - 1)] = acc;
                pooled += elu(acc);
            }
        }
        model.zeta[lam] = pooled / (static_cast<double>(out) * out);
    }
    model.phi = 0.0;
    for (size_t lam = 0; lam < ks.size(); ++lam) model.phi += model.theta[lam] * model.zeta[lam];
    model.varpi = 1.0;
    return model;
}

SimplifiedModel default_simplified(int m) {
    const int l = 3;
    std::vector<std::vector<double>> kernels;
    kernels.push_back(std::vector<double>(9, 0.1));   // all diagonals positive
    kernels.push_back({0.5, -0.3, 0.2, -0.1, 0.4, -0.2, 0.3, -0.3, 0.1});  // mixed signs
    kernels.push_back(std::vector<double>(9, -0.2));  // negative pre-activations
    std::vector<double> centered(9, 0.0);
    centered[4] = 1.0;                                // pure center tap
    kernels.push_back(centered);
    std::vector<double> theta{0.8, 0.5, -0.3, 0.6};
    return make_simplified(m, l, std::move(kernels), std::move(theta));
}

double sensor_energy(const ComplexMatrix& r) {
    if (r.rows() != r.cols()) throw std::invalid_argument("sensor_energy: matrix not square");
    return r.trace().real() / static_cast<double>(r.rows());
}

double simplified_statistic(const SimplifiedModel& model, const std::vector<double>& energies) {
    double total = 0.0;
    for (double e : energies) {
        if (e < 0.0) throw std::invalid_argument("simplified: negative energy");
        total += e;
    }
    return 1.0 / (1.0 + model.varpi * std::exp(-model.phi * total));
}

std::vector<double> simplified_gap(const SimplifiedModel& model, double energy) {
    const int m = model.m, l = model.l;
    const int out = m - l + 1;
    std::vector<double> pooled(model.kernels.size(), 0.0);
    for (size_t lam = 0; lam < model.kernels.size(); ++lam) {
        const auto& k = model.kernels[lam];
        double acc = 0.0;
        for (int i = 1; i <= out; ++i) {
            for (int j = 1; j <= out; ++j) {
                // literal valid correlation against the unit diagonal
                double pre = 0.0;
                for (int i0 = 0; i0 <= l - 1; ++i0) {
                    for (int j0 = 0; j0 <= l - 1; ++j0) {
                        const int row = i + i0, col = j + j0;
                        const double s0 = (row == col) ? 1.0 : 0.0;
                        if (s0 == 0.0) continue;
                        pre += s0 * k[static_cast<size_t>(l - 1 - i0) * l + (l - 1 - j0)];
                    }
                }
                acc += elu(pre);
            }
        }
        pooled[lam] = energy * acc / (static_cast<double>(out) * out);
    }
    return pooled;
}

double simplified_network_forward(const SimplifiedModel& model,
                                  const std::vector<double>& energies,
                                  const std::vector<double>* noise) {
    if (noise && noise->size() != model.theta.size())
        throw std::invalid_argument("simplified: noise vector must have one entry per feature");
    std::vector<double> s3(model.theta.size(), 0.0);
    for (double e : energies) {
        const std::vector<double> pooled = simplified_gap(model, e);
        for (size_t lam = 0; lam < s3.size(); ++lam) s3[lam] += pooled[lam];
    }
    if (noise)
        for (size_t lam = 0; lam < s3.size(); ++lam) s3[lam] += (*noise)[lam];
    double z = 0.0;
    for (size_t lam = 0; lam < s3.size(); ++lam) z += model.theta[lam] * s3[lam];
    return sigmoid(z);
}

double estimate_varpi(const SimplifiedModel& model, double noise_var, long long draws,
                      RngStream& stream) {
    if (!(noise_var >= 0.0)) throw std::invalid_argument("simplified: negative noise variance");
    if (draws < 1) throw std::invalid_argument("simplified: draws must be positive");
    if (noise_var == 0.0) return 1.0;
    const double sd = std::sqrt(noise_var);
    double total = 0.0;
    for (long long i = 0; i < draws; ++i) {
        double g = 0.0;
        for (double th : model.theta) g += th * (sd * stream.standard_normal());
        total += std::exp(-g);
    }
    return total / static_cast<double>(draws);
}

namespace {

double pd_at_pfa(const std::vector<double>& h0, const std::vector<double>& h1, double pfa) {
    std::vector<double> sorted = h0;
    std::sort(sorted.begin(), sorted.end());
    const double q = 1.0 - pfa;
    const size_t idx = static_cast<size_t>(
        std::max<long long>(1, static_cast<long long>(std::ceil(q * sorted.size()))));
    const double thr = sorted[std::min(idx, sorted.size()) - 1];
    long long hits = 0;
    for (double v : h1)
        if (v > thr) ++hits;
    return static_cast<double>(hits) / static_cast<double>(h1.size());
}

} // namespace

std::string RankAgreementReport::to_json_string() const {
    nlohmann::json j;
    j["spearman_simplified_ed"] = spearman_simplified_ed;
    j["spearman_ed_ec"] = spearman_ed_ec;
    j["spearman_simplified_ec"] = spearman_simplified_ec;
    j["sense_inverted"] = sense_inverted;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : roc) {
        nlohmann::json e;
        e["target_pfa"] = p.target_pfa;
        e["pd_simplified"] = p.pd_simplified;
        e["pd_ed_sdf"] = p.pd_ed_sdf;
        e["pd_ec_sdf"] = p.pd_ec_sdf;
        points.push_back(e);
    }
    j["roc"] = points;
    j["roc_match"] = roc_match;
    j["pass"] = pass;
    return j.dump(2);
}

RankAgreementReport verify_rank_agreement(const SimplifiedModel& model, const ScenarioConfig& cfg,
                                       long long trials, RngStream& stream) {
    if (cfg.rho != 0.0)
        throw std::invalid_argument("rank agreement check: requires uncorrelated antennas (rho = 0)");
    if (cfg.snr_sense_db_per_sensor)
        throw std::invalid_argument("rank agreement check: requires equal sensor noise powers");
    if (trials < 4) throw std::invalid_argument("rank agreement check: too few trials");

    const Detector ed = Detector::for_scenario(DetectorType::ED, cfg);
    const Detector ec = Detector::for_scenario(DetectorType::EC, cfg);

    std::vector<double> t_simpl, t_ed, t_ec;
    std::vector<double> h0_simpl, h0_ed, h0_ec, h1_simpl, h1_ed, h1_ec;
    t_simpl.reserve(trials);
    t_ed.reserve(trials);
    t_ec.reserve(trials);
    for (long long i = 0; i < trials; ++i) {
        const int label = static_cast<int>(i % 2);
        const CovarianceSample slot = generate_slot(cfg, label, stream);
        std::vector<double> energies;
        double ed_sum = 0.0, ec_sum = 0.0;
        for (const auto& r : slot.r) {
            energies.push_back(sensor_energy(r));
            ed_sum += ed.statistic(r);
            ec_sum += ec.statistic(r);
        }
        const double s = simplified_statistic(model, energies);
        t_simpl.push_back(s);
        t_ed.push_back(ed_sum);
        t_ec.push_back(ec_sum);
        (label ? h1_simpl : h0_simpl).push_back(s);
        (label ? h1_ed : h0_ed).push_back(ed_sum);
        (label ? h1_ec : h0_ec).push_back(ec_sum);
    }

    RankAgreementReport report;
    report.spearman_simplified_ed = spearman(t_simpl, t_ed);
    report.spearman_ed_ec = spearman(t_ed, t_ec);
    report.spearman_simplified_ec = spearman(t_simpl, t_ec);
    report.sense_inverted = model.phi < 0.0;

    report.roc_match = true;
    for (double pfa : {0.05, 0.1, 0.2}) {
        RankAgreementRocPoint p;
        p.target_pfa = pfa;
        p.pd_simplified = pd_at_pfa(h0_simpl, h1_simpl, pfa);
        p.pd_ed_sdf = pd_at_pfa(h0_ed, h1_ed, pfa);
        p.pd_ec_sdf = pd_at_pfa(h0_ec, h1_ec, pfa);
        if (!report.sense_inverted &&
            (p.pd_simplified != p.pd_ed_sdf || p.pd_ed_sdf != p.pd_ec_sdf))
            report.roc_match = false;
        report.roc.push_back(p);
    }

    const double want = report.sense_inverted ? -1.0 : 1.0;
    report.pass = report.spearman_simplified_ed == want && report.spearman_ed_ec == 1.0 &&
                  report.spearman_simplified_ec == want &&
                  (report.sense_inverted || report.roc_match);
    return report;
}

} // namespace icc
