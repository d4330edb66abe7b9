#pragma once

#include "icc/detectors.hpp"
#include "icc/nn/model.hpp"
#include "icc/scenario.hpp"
#include "icc/simplified.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace icc {

/// Stream-id blocks for the evaluation phases (training owns 1..4 << 40).
/// Trial index is added to the base, so every trial is its own stream and
/// results cannot depend on the execution schedule.
constexpr uint64_t kCalibH0Base = 5ull << 40;
constexpr uint64_t kCalibH1Base = 6ull << 40;
constexpr uint64_t kEvalH0Base = 7ull << 40;
constexpr uint64_t kEvalH1Base = 8ull << 40;
constexpr uint64_t kBitErrorBase = 9ull << 40;
constexpr uint64_t kConstellationBase = 10ull << 40;

enum class MethodKind { DetectorHdf, DetectorSdf, Icc, IccNoAircomp, Simplified };

struct MethodSpec {
    MethodKind kind = MethodKind::DetectorHdf;
    DetectorType detector = DetectorType::ED;  // meaningful for detector kinds
    std::string name;                          // canonical spelling

    /// Accepts "<ed|med|mmed|cav|ec>-<hdf|sdf>", "icc", "icc-no-aircomp"
    /// and "simplified".
    static MethodSpec parse(const std::string& name);
    bool needs_checkpoint() const {
        return kind == MethodKind::Icc || kind == MethodKind::IccNoAircomp;
    }
};

struct RocPoint {
    double target_pfa = 0.0;
    double threshold = 0.0;
    double empirical_pfa = 0.0;
    double empirical_pd = 0.0;
    long long trials_h0 = 0;
    long long trials_h1 = 0;
};

struct RocCurve {
    std::string method;
    std::vector<RocPoint> points;
    std::vector<std::string> warnings;
};

struct EvalContext {
    MethodSpec method;
    ScenarioConfig cfg;
    const nn::Model* model = nullptr;             // the icc kinds
    const SimplifiedModel* simplified = nullptr;  // optional; default built on demand
};

/// Threshold = the H0 order statistic at the 1-based index
/// ceil((1 - target) * n); decisions use strict >. target = 1 maps to
/// -infinity so every statistic exceeds it. Warns (into *warnings) when
/// the calibration set is too small to resolve the target rate.
double calibrate_threshold(const std::vector<double>& statistics_h0, double target_pfa,
                           std::vector<std::string>* warnings = nullptr);

/// ROC over a false-alarm grid with held-out calibration: thresholds come
/// from a calibration H0 set, rates from disjoint evaluation sets, all
/// sized `trials`. For hard-decision fusion the grid steers the local
/// per-sensor rate and the induced global rates are reported.
RocCurve run_roc(const EvalContext& ctx, const std::vector<double>& pfa_grid, long long trials,
                 uint64_t seed, int threads);

/// Like run_roc, but every grid entry is a target for the global
/// false-alarm rate. For hard-decision fusion the local rate is found by
/// inverting the majority-vote tail through the estimated reporting bit
/// error; other methods calibrate on the fused statistic directly.
RocCurve run_roc_global(const EvalContext& ctx, const std::vector<double>& targets,
                        long long trials, uint64_t seed, int threads);

struct SweepRow {
    std::vector<double> axis;  // one entry per axis column
    RocPoint point;
};

struct SweepResult {
    std::string method;
    std::vector<std::string> axis_names;
    std::vector<SweepRow> rows;
};

/// Per-value recalibrated operating points at one global false-alarm
/// target. axis is one of snr_sense_db, snr_report_db, n_samples,
/// k_sensors, or kc_iota (pairs values x values2 into a grid).
SweepResult run_sweep(const EvalContext& ctx, const std::string& axis,
                      const std::vector<double>& values, const std::vector<double>& values2,
                      double target_pfa, long long trials, uint64_t seed, int threads);

struct ConstellationRow {
    long long slot = 0;
    int sensor = 0;
    int symbol_index = 0;
    double re = 0.0;
    double im = 0.0;
    int label = 0;
};

/// Transmitted symbol exports (post power normalization, before the
/// channel), alternating H0/H1 slots.
std::vector<ConstellationRow> export_constellation(const nn::Model& model,
                                                   const ScenarioConfig& cfg, long long slots,
                                                   uint64_t seed);

struct AblationResult {
    RocCurve curve;               // orthogonal reporting, averaged at the FC
    int subchannels_orthogonal = 0;  // K * D
    int subchannels_aircomp = 0;     // D
};

/// The orthogonal-reporting ablation: every sensor rides its own
/// subchannel, the fusion center averages the K received vectors before
/// decoding, and the subchannel bill is K*D instead of D.
AblationResult run_ablation_no_aircomp(const nn::Model& model, const ScenarioConfig& cfg,
                                       const std::vector<double>& pfa_grid, long long trials,
                                       uint64_t seed, int threads);

} // namespace icc
