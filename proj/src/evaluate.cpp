#include "icc/evaluate.hpp"

#include "icc/airmodel.hpp"
#include "icc/fusion.hpp"
#include "icc/parallel.hpp"
#include "icc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace icc {

MethodSpec MethodSpec::parse(const std::string& name) {
    MethodSpec spec;
    spec.name = name;
    if (name == "icc") {
        spec.kind = MethodKind::Icc;
        return spec;
    }
    if (name == "icc-no-aircomp") {
        spec.kind = MethodKind::IccNoAircomp;
        return spec;
    }
    if (name == "simplified") {
        spec.kind = MethodKind::Simplified;
        return spec;
    }
    const size_t dash = name.rfind('-');
    if (dash != std::string::npos) {
        const std::string det = name.substr(0, dash);
        const std::string fuse = name.substr(dash + 1);
        if (fuse == "hdf" || fuse == "sdf") {
            spec.detector = detector_from_name(det);  // throws on bad detector
            spec.kind = fuse == "hdf" ? MethodKind::DetectorHdf : MethodKind::DetectorSdf;
            return spec;
        }
    }
    throw std::invalid_argument(
        "unknown method '" + name +
        "' (want <ed|med|mmed|cav|ec>-<hdf|sdf>, icc, icc-no-aircomp or simplified)");
}

double calibrate_threshold(const std::vector<double>& statistics_h0, double target_pfa,
                           std::vector<std::string>* warnings) {
    if (statistics_h0.empty()) throw std::invalid_argument("calibrate: no H0 statistics");
    if (!(target_pfa >= 0.0 && target_pfa <= 1.0))
        throw std::invalid_argument("calibrate: target_pfa outside [0,1]");
    const long long n = static_cast<long long>(statistics_h0.size());
    if (warnings && target_pfa * static_cast<double>(n) < 10.0)
        warnings->push_back("calibration set of " + std::to_string(n) +
                            " cannot resolve target_pfa " + std::to_string(target_pfa) +
                            " reliably (want >= 10/target samples)");
    std::vector<double> sorted = statistics_h0;
    std::sort(sorted.begin(), sorted.end());
    const long long idx =
        static_cast<long long>(std::ceil((1.0 - target_pfa) * static_cast<double>(n)));
    if (idx < 1) return -std::numeric_limits<double>::infinity();
    return sorted[static_cast<size_t>(std::min(idx, n)) - 1];
}

namespace {

// Per-trial record for the classical pipelines: local statistics plus
// the stream state right after slot generation, so the reporting draws
// can be replayed for any threshold setting.
struct LocalTrial {
    std::vector<double> stats;
    uint64_t counter = 0;
};

std::vector<LocalTrial> detector_trials(const ScenarioConfig& cfg, const Detector& det,
                                        int label, uint64_t seed, uint64_t base,
                                        long long trials, int threads) {
    std::vector<LocalTrial> out(static_cast<size_t>(trials));
    for_each_trial(trials, threads, [&](long long t) {
        RngStream s(seed, base + static_cast<uint64_t>(t));
        const CovarianceSample slot = generate_slot(cfg, label, s);
        LocalTrial& rec = out[static_cast<size_t>(t)];
        rec.stats.reserve(slot.r.size());
        for (const auto& r : slot.r) rec.stats.push_back(det.statistic(r));
        rec.counter = s.counter;
    });
    return out;
}

double icc_trial(const ScenarioConfig& cfg, const nn::Model& model, bool aircomp, int label,
                 uint64_t seed, uint64_t stream_id) {
    RngStream s(seed, stream_id);
    const CovarianceSample slot = generate_slot(cfg, label, s);
    const nn::Batch4 x = nn::Model::covariance_input(slot.r);
    const nn::Batch2 enc = model.encode_infer(x);
    const int k = static_cast<int>(slot.r.size());
    const int d = model.arch().d;
    std::vector<std::vector<cdouble>> ys(k, std::vector<cdouble>(d));
    for (int ki = 0; ki < k; ++ki)
        for (int j = 0; j < d; ++j)
            ys[ki][j] = cdouble(enc.at(ki, 2 * j), enc.at(ki, 2 * j + 1));
    std::vector<cdouble> z(d);
    if (aircomp) {
        const ReportedSymbols rep = report_aircomp(ys, cfg, s);
        z = *rep.aggregated;
    } else {
        const ReportedSymbols rep = report_orthogonal(ys, cfg, s);
        for (int ki = 0; ki < k; ++ki)
            for (int j = 0; j < d; ++j) z[j] += (*rep.per_sensor)[ki][j];
        for (auto& v : z) v /= static_cast<double>(k);
    }
    nn::Batch2 zb(1, 2 * d);
    for (int j = 0; j < d; ++j) {
        zb.at(0, 2 * j) = z[j].real();
        zb.at(0, 2 * j + 1) = z[j].imag();
    }
    return model.decode_infer(zb).at(0, 0);
}

std::vector<double> icc_trials(const ScenarioConfig& cfg, const nn::Model& model, bool aircomp,
                               int label, uint64_t seed, uint64_t base, long long trials,
                               int threads) {
    std::vector<double> out(static_cast<size_t>(trials));
    for_each_trial(trials, threads, [&](long long t) {
        out[static_cast<size_t>(t)] =
            icc_trial(cfg, model, aircomp, label, seed, base + static_cast<uint64_t>(t));
    });
    return out;
}

std::vector<double> simplified_trials(const ScenarioConfig& cfg, const SimplifiedModel& model,
                                      int label, uint64_t seed, uint64_t base, long long trials,
                                      int threads) {
    std::vector<double> out(static_cast<size_t>(trials));
    for_each_trial(trials, threads, [&](long long t) {
        RngStream s(seed, base + static_cast<uint64_t>(t));
        const CovarianceSample slot = generate_slot(cfg, label, s);
        std::vector<double> energies;
        energies.reserve(slot.r.size());
        for (const auto& r : slot.r) energies.push_back(sensor_energy(r));
        out[static_cast<size_t>(t)] = simplified_statistic(model, energies);
    });
    return out;
}

double exceed_rate(const std::vector<double>& stats, double thr) {
    long long hits = 0;
    for (double v : stats)
        if (v > thr) ++hits;
    return static_cast<double>(hits) / static_cast<double>(stats.size());
}

int majority_need(int k) { return (k + 2) / 2; }

double poisson_binomial_tail(const std::vector<double>& probs, int k_min) {
    std::vector<double> dist{1.0};
    for (double p : probs) {
        std::vector<double> next(dist.size() + 1, 0.0);
        for (size_t j = 0; j < dist.size(); ++j) {
            next[j] += dist[j] * (1.0 - p);
            next[j + 1] += dist[j] * p;
        }
        dist = std::move(next);
    }
    double acc = 0.0;
    for (size_t j = std::max(0, k_min); j < dist.size(); ++j) acc += dist[j];
    return std::min(acc, 1.0);
}

// Majority decision rate with per-sensor thresholds, replaying each
// trial's reporting draws from the stored post-slot stream state.
double hdf_rate(const std::vector<LocalTrial>& set, const std::vector<double>& thr,
                const ScenarioConfig& cfg, uint64_t seed, uint64_t base, int threads) {
    std::vector<uint8_t> decisions(set.size(), 0);
    const long long n = static_cast<long long>(set.size());
    for_each_trial(n, threads, [&](long long t) {
        const LocalTrial& rec = set[static_cast<size_t>(t)];
        RngStream s(seed, base + static_cast<uint64_t>(t));
        s.counter = rec.counter;
        std::vector<uint8_t> received(rec.stats.size());
        for (size_t k = 0; k < rec.stats.size(); ++k) {
            const std::vector<uint8_t> vote{
                static_cast<uint8_t>(local_decision(rec.stats[k], thr[k]))};
            received[k] = bpsk_channel(vote, cfg, s, cfg.distances[k])[0];
        }
        decisions[static_cast<size_t>(t)] = static_cast<uint8_t>(hdf_fuse(received));
    });
    long long hits = 0;
    for (uint8_t d : decisions) hits += d;
    return static_cast<double>(hits) / static_cast<double>(set.size());
}

std::vector<double> sdf_fused(const std::vector<LocalTrial>& set, const QuantizerSpec& q,
                              const ScenarioConfig& cfg, uint64_t seed, uint64_t base,
                              int threads) {
    std::vector<double> fused(set.size(), 0.0);
    const long long n = static_cast<long long>(set.size());
    for_each_trial(n, threads, [&](long long t) {
        const LocalTrial& rec = set[static_cast<size_t>(t)];
        RngStream s(seed, base + static_cast<uint64_t>(t));
        s.counter = rec.counter;
        std::vector<double> received(rec.stats.size());
        for (size_t k = 0; k < rec.stats.size(); ++k)
            received[k] = quantize_transmit(rec.stats[k], q, cfg, s, cfg.distances[k]);
        fused[static_cast<size_t>(t)] = sdf_fuse(received);
    });
    return fused;
}

void append_monotonicity_warnings(RocCurve& curve) {
    for (size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        if (b.target_pfa < a.target_pfa) continue;  // unsorted grid, skip the check
        const double slack = 3.0 * (binomial_stderr(a.empirical_pd, a.trials_h1) +
                                    binomial_stderr(b.empirical_pd, b.trials_h1));
        if (b.empirical_pd < a.empirical_pd - slack)
            curve.warnings.push_back(
                "detection rate drops between target_pfa " + std::to_string(a.target_pfa) +
                " and " + std::to_string(b.target_pfa) + " beyond Monte Carlo noise");
    }
}

RocCurve roc_hdf(const EvalContext& ctx, const std::vector<double>& grid, long long trials,
                 uint64_t seed, int threads, bool global_targets) {
    const ScenarioConfig& cfg = ctx.cfg;
    const Detector det = Detector::for_scenario(ctx.method.detector, cfg);
    const auto calib = detector_trials(cfg, det, 0, seed, kCalibH0Base, trials, threads);
    const auto eval_h0 = detector_trials(cfg, det, 0, seed, kEvalH0Base, trials, threads);
    const auto eval_h1 = detector_trials(cfg, det, 1, seed, kEvalH1Base, trials, threads);

    const int k = cfg.k;
    std::vector<std::vector<double>> per_sensor(static_cast<size_t>(k));
    for (int ki = 0; ki < k; ++ki) {
        per_sensor[static_cast<size_t>(ki)].reserve(calib.size());
        for (const auto& rec : calib)
            per_sensor[static_cast<size_t>(ki)].push_back(rec.stats[static_cast<size_t>(ki)]);
    }

    RocCurve curve;
    curve.method = ctx.method.name;

    std::vector<double> pe(static_cast<size_t>(k), 0.0);
    if (global_targets) {
        // reporting bit error per sensor, measured once on its own stream
        const long long nbits = std::max<long long>(20000, trials);
        for (int ki = 0; ki < k; ++ki) {
            RngStream s(seed, kBitErrorBase + static_cast<uint64_t>(ki));
            const std::vector<uint8_t> sent(static_cast<size_t>(nbits), 0);
            const std::vector<uint8_t> got =
                bpsk_channel(sent, cfg, s, cfg.distances[static_cast<size_t>(ki)]);
            long long flips = 0;
            for (uint8_t bit : got) flips += bit;
            pe[static_cast<size_t>(ki)] =
                static_cast<double>(flips) / static_cast<double>(nbits);
        }
    }

    const int need = majority_need(k);
    for (double target : grid) {
        double p_local = target;
        if (global_targets) {
            // invert the majority-vote tail through the bit-error floor
            auto global_rate = [&](double p) {
                std::vector<double> votes(static_cast<size_t>(k));
                for (int ki = 0; ki < k; ++ki)
                    votes[static_cast<size_t>(ki)] =
                        p * (1.0 - pe[static_cast<size_t>(ki)]) +
                        (1.0 - p) * pe[static_cast<size_t>(ki)];
                return poisson_binomial_tail(votes, need);
            };
            if (global_rate(0.0) >= target) {
                p_local = 0.0;
                curve.warnings.push_back("target_pfa " + std::to_string(target) +
                                         " is below the reporting bit-error floor");
            } else if (global_rate(1.0) <= target) {
                p_local = 1.0;
            } else {
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (global_rate(mid) < target ? lo : hi) = mid;
                }
                p_local = 0.5 * (lo + hi);
            }
        }

        std::vector<double> thr(static_cast<size_t>(k));
        for (int ki = 0; ki < k; ++ki)
            thr[static_cast<size_t>(ki)] =
                calibrate_threshold(per_sensor[static_cast<size_t>(ki)], p_local,
                                    ki == 0 ? &curve.warnings : nullptr);

        RocPoint p;
        p.target_pfa = target;
        p.threshold = thr[0];
        p.empirical_pfa = hdf_rate(eval_h0, thr, cfg, seed, kEvalH0Base, threads);
        p.empirical_pd = hdf_rate(eval_h1, thr, cfg, seed, kEvalH1Base, threads);
        p.trials_h0 = trials;
        p.trials_h1 = trials;
        curve.points.push_back(p);
    }
    return curve;
}

RocCurve roc_sdf(const EvalContext& ctx, const std::vector<double>& grid, long long trials,
                 uint64_t seed, int threads) {
    const ScenarioConfig& cfg = ctx.cfg;
    const Detector det = Detector::for_scenario(ctx.method.detector, cfg);
    const auto calib_h0 = detector_trials(cfg, det, 0, seed, kCalibH0Base, trials, threads);
    const auto calib_h1 = detector_trials(cfg, det, 1, seed, kCalibH1Base, trials, threads);
    const auto eval_h0 = detector_trials(cfg, det, 0, seed, kEvalH0Base, trials, threads);
    const auto eval_h1 = detector_trials(cfg, det, 1, seed, kEvalH1Base, trials, threads);

    // quantizer span from the mixed calibration pool, clipped at the
    // 0.1% tails so a stray statistic cannot blow up the step size
    std::vector<double> pooled;
    pooled.reserve((calib_h0.size() + calib_h1.size()) * static_cast<size_t>(cfg.k));
    for (const auto& rec : calib_h0) pooled.insert(pooled.end(), rec.stats.begin(), rec.stats.end());
    for (const auto& rec : calib_h1) pooled.insert(pooled.end(), rec.stats.begin(), rec.stats.end());
    QuantizerSpec q;
    q.bits = 8;
    q.lo = percentile(pooled, 0.001);
    q.hi = percentile(pooled, 0.999);
    if (!(q.hi > q.lo)) q.hi = q.lo + 1.0;
    q.validate();

    const auto calib_fused = sdf_fused(calib_h0, q, cfg, seed, kCalibH0Base, threads);
    const auto eval_fused_h0 = sdf_fused(eval_h0, q, cfg, seed, kEvalH0Base, threads);
    const auto eval_fused_h1 = sdf_fused(eval_h1, q, cfg, seed, kEvalH1Base, threads);

    RocCurve curve;
    curve.method = ctx.method.name;
    for (double target : grid) {
        RocPoint p;
        p.target_pfa = target;
        p.threshold = calibrate_threshold(calib_fused, target, &curve.warnings);
        p.empirical_pfa = exceed_rate(eval_fused_h0, p.threshold);
        p.empirical_pd = exceed_rate(eval_fused_h1, p.threshold);
        p.trials_h0 = trials;
        p.trials_h1 = trials;
        curve.points.push_back(p);
    }
    return curve;
}

RocCurve roc_scalar(const EvalContext& ctx, const std::vector<double>& grid, long long trials,
                    uint64_t seed, int threads) {
    const ScenarioConfig& cfg = ctx.cfg;
    std::vector<double> calib, eval_h0, eval_h1;
    if (ctx.method.kind == MethodKind::Simplified) {
        SimplifiedModel local;
        const SimplifiedModel* model = ctx.simplified;
        if (!model) {
            local = default_simplified(cfg.m);
            model = &local;
        }
        calib = simplified_trials(cfg, *model, 0, seed, kCalibH0Base, trials, threads);
        eval_h0 = simplified_trials(cfg, *model, 0, seed, kEvalH0Base, trials, threads);
        eval_h1 = simplified_trials(cfg, *model, 1, seed, kEvalH1Base, trials, threads);
    } else {
        const bool aircomp = ctx.method.kind == MethodKind::Icc;
        const nn::Model& model = *ctx.model;
        calib = icc_trials(cfg, model, aircomp, 0, seed, kCalibH0Base, trials, threads);
        eval_h0 = icc_trials(cfg, model, aircomp, 0, seed, kEvalH0Base, trials, threads);
        eval_h1 = icc_trials(cfg, model, aircomp, 1, seed, kEvalH1Base, trials, threads);
    }

    RocCurve curve;
    curve.method = ctx.method.name;
    for (double target : grid) {
        RocPoint p;
        p.target_pfa = target;
        p.threshold = calibrate_threshold(calib, target, &curve.warnings);
        p.empirical_pfa = exceed_rate(eval_h0, p.threshold);
        p.empirical_pd = exceed_rate(eval_h1, p.threshold);
        p.trials_h0 = trials;
        p.trials_h1 = trials;
        curve.points.push_back(p);
    }
    return curve;
}

void check_context(const EvalContext& ctx, long long trials) {
    ctx.cfg.validate();
    if (trials < 1) throw std::invalid_argument("evaluate: trials must be positive");
    if (ctx.method.needs_checkpoint()) {
        if (!ctx.model)
            throw std::invalid_argument("method '" + ctx.method.name + "' needs a checkpoint");
        if (ctx.model->arch().m != ctx.cfg.m)
            throw std::invalid_argument(
                "checkpoint expects covariance size " + std::to_string(ctx.model->arch().m) +
                " but the scenario uses m=" + std::to_string(ctx.cfg.m));
    }
}

} // namespace

RocCurve run_roc(const EvalContext& ctx, const std::vector<double>& pfa_grid, long long trials,
                 uint64_t seed, int threads) {
    check_context(ctx, trials);
    if (pfa_grid.empty()) throw std::invalid_argument("evaluate: empty false-alarm grid");
    RocCurve curve;
    switch (ctx.method.kind) {
        case MethodKind::DetectorHdf:
            curve = roc_hdf(ctx, pfa_grid, trials, seed, threads, /*global_targets=*/false);
            break;
        case MethodKind::DetectorSdf:
            curve = roc_sdf(ctx, pfa_grid, trials, seed, threads);
            break;
        default:
            curve = roc_scalar(ctx, pfa_grid, trials, seed, threads);
            break;
    }
    append_monotonicity_warnings(curve);
    return curve;
}

RocCurve run_roc_global(const EvalContext& ctx, const std::vector<double>& targets,
                        long long trials, uint64_t seed, int threads) {
    check_context(ctx, trials);
    if (targets.empty()) throw std::invalid_argument("evaluate: empty false-alarm grid");
    RocCurve curve;
    if (ctx.method.kind == MethodKind::DetectorHdf)
        curve = roc_hdf(ctx, targets, trials, seed, threads, /*global_targets=*/true);
    else if (ctx.method.kind == MethodKind::DetectorSdf)
        curve = roc_sdf(ctx, targets, trials, seed, threads);
    else
        curve = roc_scalar(ctx, targets, trials, seed, threads);
    append_monotonicity_warnings(curve);
    return curve;
}

SweepResult run_sweep(const EvalContext& ctx, const std::string& axis,
                      const std::vector<double>& values, const std::vector<double>& values2,
                      double target_pfa, long long trials, uint64_t seed, int threads) {
    if (values.empty()) throw std::invalid_argument("sweep: no axis values");
    SweepResult result;
    result.method = ctx.method.name;

    auto integer_value = [&axis](double v) {
        if (v < 1.0 || v != std::floor(v))
            throw std::invalid_argument("sweep: axis " + axis + " needs positive integers");
        return static_cast<int>(v);
    };

    std::vector<std::vector<double>> rows;
    if (axis == "kc_iota") {
        if (values2.empty())
            throw std::invalid_argument("sweep: kc_iota needs a second value list");
        result.axis_names = {"k_factor_db", "iota"};
        for (double kc : values)
            for (double io : values2) rows.push_back({kc, io});
    } else if (axis == "snr_sense_db" || axis == "snr_report_db" || axis == "n_samples" ||
               axis == "k_sensors") {
        if (!values2.empty())
            throw std::invalid_argument("sweep: axis " + axis + " takes a single value list");
        result.axis_names = {axis};
        for (double v : values) rows.push_back({v});
    } else {
        throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    }

    for (const auto& row : rows) {
        EvalContext point_ctx = ctx;
        if (axis == "snr_sense_db") point_ctx.cfg.set_snr_sense_db(row[0]);
        else if (axis == "snr_report_db") point_ctx.cfg.set_snr_report_db(row[0]);
        else if (axis == "n_samples") point_ctx.cfg.n = integer_value(row[0]);
        else if (axis == "k_sensors") point_ctx.cfg.set_k(integer_value(row[0]));
        else {
            point_ctx.cfg.k_factor_db = row[0];
            point_ctx.cfg.iota = row[1];
        }
        const RocCurve curve =
            run_roc_global(point_ctx, {target_pfa}, trials, seed, threads);
        result.rows.push_back({row, curve.points[0]});
    }
    return result;
}

std::vector<ConstellationRow> export_constellation(const nn::Model& model,
                                                   const ScenarioConfig& cfg, long long slots,
                                                   uint64_t seed) {
    cfg.validate();
    if (slots < 1) throw std::invalid_argument("constellation: slots must be positive");
    if (model.arch().m != cfg.m)
        throw std::invalid_argument("constellation: checkpoint input size does not match m");
    const int d = model.arch().d;
    std::vector<ConstellationRow> rows;
    rows.reserve(static_cast<size_t>(slots) * cfg.k * d);
    for (long long s = 0; s < slots; ++s) {
        const int label = static_cast<int>(s % 2);
        RngStream stream(seed, kConstellationBase + static_cast<uint64_t>(s));
        const CovarianceSample slot = generate_slot(cfg, label, stream);
        const nn::Batch4 x = nn::Model::covariance_input(slot.r);
        const nn::Batch2 enc = model.encode_infer(x);
        for (int k = 0; k < cfg.k; ++k)
            for (int j = 0; j < d; ++j)
                rows.push_back({s, k, j, enc.at(k, 2 * j), enc.at(k, 2 * j + 1), label});
    }
    return rows;
}

AblationResult run_ablation_no_aircomp(const nn::Model& model, const ScenarioConfig& cfg,
                                       const std::vector<double>& pfa_grid, long long trials,
                                       uint64_t seed, int threads) {
    EvalContext ctx;
    ctx.method = MethodSpec::parse("icc-no-aircomp");
    ctx.cfg = cfg;
    ctx.model = &model;
    AblationResult result;
    result.curve = run_roc(ctx, pfa_grid, trials, seed, threads);
    result.subchannels_orthogonal = cfg.k * model.arch().d;
    result.subchannels_aircomp = model.arch().d;
    return result;
}

} // namespace icc
