#pragma once

#include "icc/complex_matrix.hpp"
#include "icc/scenario.hpp"

namespace icc {

enum class DetectorType { ED, MED, MMED, CAV, EC };

DetectorType detector_from_name(const std::string& name);
std::string detector_name(DetectorType t);

/// One-shot test statistic on a sample covariance. ED and MED need the
/// noise power; EC additionally carries a precomputed weighting built from
/// the assumed signal covariance.
class Detector {
public:
    /// ED, MED, MMED or CAV.
    Detector(DetectorType type, double sigma_u2);

    /// Estimator-correlator with prior signal covariance r_s:
    /// weight W = R_s (R_s + sigma_u2 I)^{-1}, statistic trace(W r).
    static Detector estimator_correlator(const ComplexMatrix& r_s, double sigma_u2);

    /// Detector matched to a scenario (builds the EC prior from the
    /// configured signal and channel statistics when type is EC).
    static Detector for_scenario(DetectorType type, const ScenarioConfig& cfg);

    DetectorType type() const { return type_; }

    double statistic(const ComplexMatrix& r) const;

private:
    Detector() = default;
    DetectorType type_ = DetectorType::ED;
    double sigma_u2_ = 1.0;
    ComplexMatrix ec_weight_;
};

/// Hard local decision: 1 iff the statistic strictly exceeds the threshold.
int local_decision(double statistic, double threshold);

} // namespace icc
