#include <doctest.h>

#include "icc/simplified.hpp"
#include "icc/stats.hpp"

#include <cmath>
#include <vector>

using icc::RngStream;
using icc::ScenarioConfig;
using icc::SimplifiedModel;

namespace {

// Literal valid convolution of a kernel over the unit diagonal matrix,
// written independently of the library's index bookkeeping.
std::vector<double> conv_diag(int m, int l, const std::vector<double>& kernel) {
    const int out = m - l + 1;
    std::vector<double> eta(static_cast<size_t>(out) * out, 0.0);
    for (int i = 0; i < out; ++i)
        for (int j = 0; j < out; ++j) {
            double acc = 0.0;
            for (int a = 0; a < l; ++a)
                for (int b = 0; b < l; ++b) {
                    const int p = i + a, q = j + b;
                    const double diag = (p == q) ? 1.0 : 0.0;
                    acc += diag * kernel[static_cast<size_t>(l - 1 - a) * l + (l - 1 - b)];
                }
            eta[static_cast<size_t>(i) * out + j] = acc;
        }
    return eta;
}

double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

} // namespace

TEST_SUITE("simplified") {

TEST_CASE("pre-activations match a literal convolution over the diagonal") {
    const int m = 10, l = 3;
    const std::vector<std::vector<double>> kernels{
        {0.5, -0.3, 0.2, -0.1, 0.4, -0.2, 0.3, -0.3, 0.1},
        {1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.25}};
    const SimplifiedModel model = icc::make_simplified(m, l, kernels, {0.7, -0.2});

    REQUIRE(model.eta.size() == 2);
    const int out = m - l + 1;
    for (size_t lam = 0; lam < 2; ++lam) {
        const auto literal = conv_diag(m, l, kernels[lam]);
        REQUIRE(model.eta[lam].size() == static_cast<size_t>(out) * out);
        double zeta = 0.0;
        for (size_t i = 0; i < literal.size(); ++i) {
            CHECK(model.eta[lam][i] == doctest::Approx(literal[i]).epsilon(1e-12));
            zeta += elu(literal[i]);
        }
        zeta /= static_cast<double>(out) * out;
        CHECK(model.zeta[lam] == doctest::Approx(zeta).epsilon(1e-12));
    }
    const double phi = 0.7 * model.zeta[0] - 0.2 * model.zeta[1];
    CHECK(model.phi == doctest::Approx(phi).epsilon(1e-12));
}

TEST_CASE("pooled features scale linearly with the slot energy") {
    const SimplifiedModel model = icc::default_simplified(12);
    const auto unit = icc::simplified_gap(model, 1.0);
    const auto scaled = icc::simplified_gap(model, 2.5);
    REQUIRE(unit.size() == model.zeta.size());
    for (size_t i = 0; i < unit.size(); ++i) {
        CHECK(unit[i] == doctest::Approx(model.zeta[i]).epsilon(1e-12));
        CHECK(scaled[i] == doctest::Approx(2.5 * unit[i]).epsilon(1e-12));
    }
}

TEST_CASE("network forward equals the closed form") {
    const SimplifiedModel model = icc::default_simplified(12);
    CHECK(model.phi > 0.0);
    RngStream s(61, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> energies;
        for (int k = 0; k < 4; ++k) energies.push_back(0.1 + 3.0 * s.uniform());
        const double net = icc::simplified_network_forward(model, energies);
        const double formula = icc::simplified_statistic(model, energies);
        CHECK(net == doctest::Approx(formula).epsilon(1e-10));
    }
}

TEST_CASE("statistic is a strictly monotone map of the energy sum") {
    const SimplifiedModel model = icc::default_simplified(12);
    RngStream s(62, 0);
    std::vector<double> stats, sums;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> energies;
        for (int k = 0; k < 3; ++k) energies.push_back(0.1 + 2.0 * s.uniform());
        double sum = 0.0;
        for (double e : energies) sum += e;
        sums.push_back(sum);
        stats.push_back(icc::simplified_statistic(model, energies));
    }
    CHECK(icc::spearman(stats, sums) == 1.0);

    // flipping the head sign flips the decision direction
    SimplifiedModel negated = icc::make_simplified(
        model.m, model.l, model.kernels,
        {-model.theta[0], -model.theta[1], -model.theta[2], -model.theta[3]});
    CHECK(negated.phi < 0.0);
    std::vector<double> neg_stats;
    for (size_t i = 0; i < sums.size(); ++i)
        neg_stats.push_back(icc::simplified_statistic(negated, {sums[i]}));
    CHECK(icc::spearman(neg_stats, sums) == -1.0);
}

TEST_CASE("noise expectation factor matches the gaussian closed form") {
    const SimplifiedModel model = icc::default_simplified(8);
    double theta2 = 0.0;
    for (double t : model.theta) theta2 += t * t;
    const double var = 0.04;
    RngStream s(63, 0);
    const double mc = icc::estimate_varpi(model, var, 200000, s);
    CHECK(mc == doctest::Approx(std::exp(0.5 * var * theta2)).epsilon(0.02));
    RngStream s2(63, 1);
    CHECK(icc::estimate_varpi(model, 0.0, 10, s2) == 1.0);
}

TEST_CASE("rank agreement report on an uncorrelated scenario") {
    ScenarioConfig cfg;
    cfg.set_k(2);
    cfg.m = 6;
    cfg.n = 16;
    cfg.rho = 0.0;
    cfg.set_snr_sense_db(-5.0);
    cfg.validate();

    const SimplifiedModel model = icc::default_simplified(cfg.m);
    RngStream s(64, 0);
    const icc::RankAgreementReport report = icc::verify_rank_agreement(model, cfg, 2000, s);
    CHECK(report.spearman_simplified_ed == 1.0);
    CHECK(report.spearman_ed_ec == 1.0);
    CHECK(report.spearman_simplified_ec == 1.0);
    CHECK_FALSE(report.sense_inverted);
    CHECK(report.pass);
    REQUIRE(!report.roc.empty());
    for (const auto& p : report.roc) {
        CHECK(p.pd_simplified == p.pd_ed_sdf);
        CHECK(p.pd_ed_sdf == p.pd_ec_sdf);
    }
    const std::string json = report.to_json_string();
    CHECK(json.find("spearman_simplified_ed") != std::string::npos);
}

TEST_CASE("rank agreement check refuses correlated antennas") {
    ScenarioConfig cfg;
    cfg.set_k(2);
    cfg.m = 6;
    cfg.n = 16;
    cfg.rho = 0.5;
    const SimplifiedModel model = icc::default_simplified(cfg.m);
    RngStream s(65, 0);
    CHECK_THROWS_WITH_AS(icc::verify_rank_agreement(model, cfg, 100, s),
                         doctest::Contains("rho"), std::invalid_argument);
}

TEST_CASE("simplified model shape validation") {
    CHECK_THROWS(icc::make_simplified(2, 3, {{1.0}}, {1.0}));  // kernel larger than input
    CHECK_THROWS(icc::make_simplified(8, 3, {{1.0, 2.0}}, {1.0}));  // wrong kernel length
    CHECK_THROWS(icc::make_simplified(8, 3, {std::vector<double>(9, 0.1)}, {1.0, 2.0}));
}

} // TEST_SUITE
