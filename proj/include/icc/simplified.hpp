#pragma once

#include "icc/complex_matrix.hpp"
#include "icc/rng.hpp"
#include "icc/scenario.hpp"

#include <string>
#include <vector>

namespace icc {

/// Degenerate single-conv network used to check the analytic equivalence
/// between the learned statistic and energy detection with equal-gain
/// soft fusion. On diagonal inputs the whole pipeline collapses to a
/// sigmoid of phi * (total energy) plus a noise term.
///
/// The network is defined on the normalized input domain: the forward
/// pass evaluates conv + ELU + pooling on the unit diagonal and scales
/// the pooled features by the slot energy. That keeps the collapse exact
/// for kernels whose pre-activations are negative, where ELU itself is
/// not homogeneous.
struct SimplifiedModel {
    int m = 12;  // diagonal input size
    int l = 3;   // kernel size (valid convolution, output (m-l+1)^2)
    std::vector<std::vector<double>> kernels;  // lambda entries, each l*l row-major
    std::vector<double> theta;                 // final linear weights, length lambda

    // derived, filled by make_simplified
    std::vector<std::vector<double>> eta;  // per kernel, (m-l+1)^2 pre-activations
    std::vector<double> zeta;              // pooled ELU response per kernel
    double phi = 0.0;                      // sum theta * zeta
    double varpi = 1.0;                    // noise expectation factor (1 = noiseless)
};

/// Builds the derived quantities and validates shapes.
SimplifiedModel make_simplified(int m, int l, std::vector<std::vector<double>> kernels,
                                std::vector<double> theta);

/// Fixed four-kernel model (mixed-sign pre-activations, phi > 0).
SimplifiedModel default_simplified(int m);

/// Per-antenna slot energy, trace(R) / M.
double sensor_energy(const ComplexMatrix& r);

/// Closed-form statistic T = 1 / (1 + varpi * exp(-phi * sum energies)).
double simplified_statistic(const SimplifiedModel& model, const std::vector<double>& energies);

/// Pooled feature vector of the literal network for one sensor at the
/// given energy (conv + ELU + global average pooling on the unit
/// diagonal, scaled by the energy).
std::vector<double> simplified_gap(const SimplifiedModel& model, double energy);

/// Literal degenerate network end to end: per-sensor pooled features,
/// noiseless aggregation plus an optional additive noise vector, linear
/// head, sigmoid.
double simplified_network_forward(const SimplifiedModel& model,
                                  const std::vector<double>& energies,
                                  const std::vector<double>* noise = nullptr);

/// Monte-Carlo estimate of E[exp(-theta . n)] for i.i.d. Gaussian noise
/// of the given variance on each feature.
double estimate_varpi(const SimplifiedModel& model, double noise_var, long long draws,
                      RngStream& stream);

struct RankAgreementRocPoint {
    double target_pfa = 0.0;
    double pd_simplified = 0.0;
    double pd_ed_sdf = 0.0;
    double pd_ec_sdf = 0.0;
};

struct RankAgreementReport {
    double spearman_simplified_ed = 0.0;
    double spearman_ed_ec = 0.0;
    double spearman_simplified_ec = 0.0;
    bool sense_inverted = false;  // phi < 0 flips the decision direction
    std::vector<RankAgreementRocPoint> roc;
    bool roc_match = false;
    bool pass = false;

    std::string to_json_string() const;
};

/// Rank-equivalence check between the simplified statistic, energy
/// detection with equal-gain soft fusion, and the estimator-correlator
/// with equal-gain soft fusion. Requires uncorrelated antennas (rho = 0)
/// and equal per-sensor noise powers.
RankAgreementReport verify_rank_agreement(const SimplifiedModel& model, const ScenarioConfig& cfg,
                                       long long trials, RngStream& stream);

} // namespace icc
