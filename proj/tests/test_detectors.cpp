#include <doctest.h>

#include "icc/airmodel.hpp"
#include "icc/detectors.hpp"
#include "icc/stats.hpp"

#include <cmath>
#include <vector>

using icc::cdouble;
using icc::ComplexMatrix;
using icc::Detector;
using icc::DetectorType;
using icc::RngStream;

namespace {

ComplexMatrix sample_matrix() {
    ComplexMatrix r(2, 2);
    r(0, 0) = 3.0;
    r(1, 1) = 1.0;
    r(0, 1) = cdouble(0.5, 0.5);
    r(1, 0) = std::conj(r(0, 1));
    return r;
}

ComplexMatrix scaled(const ComplexMatrix& r, double c) {
    ComplexMatrix out = r;
    for (auto& v : out.data()) v *= c;
    return out;
}

} // namespace

TEST_SUITE("detectors") {

TEST_CASE("names round trip and bad names are rejected") {
    for (const char* n : {"ed", "med", "mmed", "cav", "ec"})
        CHECK(icc::detector_name(icc::detector_from_name(n)) == n);
    CHECK_THROWS(icc::detector_from_name("energy"));
}

TEST_CASE("energy statistic is the normalized trace") {
    const Detector ed(DetectorType::ED, 2.0);
    CHECK(ed.statistic(sample_matrix()) == doctest::Approx(4.0 / (2.0 * 2.0)).epsilon(1e-15));
}

TEST_CASE("eigenvalue statistics on a known matrix") {
    // eigenvalues of [[3, .5+.5i], [.5-.5i, 1]] are 2 +- sqrt(1.5)
    const double lmax = 2.0 + std::sqrt(1.5);
    const double lmin = 2.0 - std::sqrt(1.5);
    const Detector med(DetectorType::MED, 0.5);
    CHECK(med.statistic(sample_matrix()) == doctest::Approx(lmax / 0.5).epsilon(1e-12));
    const Detector mmed(DetectorType::MMED, 1.0);
    CHECK(mmed.statistic(sample_matrix()) == doctest::Approx(lmax / lmin).epsilon(1e-12));
}

TEST_CASE("mmed refuses a numerically singular covariance") {
    ComplexMatrix rank1(2, 2);
    rank1(0, 0) = 1.0;  // remaining entries zero
    const Detector mmed(DetectorType::MMED, 1.0);
    CHECK_THROWS_WITH_AS(mmed.statistic(rank1), doctest::Contains("singular"),
                         std::runtime_error);
}

TEST_CASE("covariance absolute value statistic") {
    const Detector cav(DetectorType::CAV, 1.0);
    const double off = std::abs(cdouble(0.5, 0.5));
    CHECK(cav.statistic(sample_matrix()) ==
          doctest::Approx((4.0 + 2.0 * off) / 4.0).epsilon(1e-12));
}

TEST_CASE("estimator correlator reduces to scaled energy for a white prior") {
    const ComplexMatrix prior = ComplexMatrix::identity(2);
    const Detector ec = Detector::estimator_correlator(prior, 1.0);
    // W = I (I + I)^{-1} = I/2, so the statistic is trace(r)/2
    CHECK(ec.statistic(sample_matrix()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scale invariance and linear scaling") {
    const ComplexMatrix r = sample_matrix();
    const Detector mmed(DetectorType::MMED, 1.0);
    const Detector cav(DetectorType::CAV, 1.0);
    const Detector ed(DetectorType::ED, 1.0);
    const Detector med(DetectorType::MED, 1.0);
    for (double c : {0.25, 3.0, 1234.5}) {
        CHECK(mmed.statistic(scaled(r, c)) ==
              doctest::Approx(mmed.statistic(r)).epsilon(1e-12));
        CHECK(cav.statistic(scaled(r, c)) == doctest::Approx(cav.statistic(r)).epsilon(1e-12));
        CHECK(ed.statistic(scaled(r, c)) == doctest::Approx(c * ed.statistic(r)).epsilon(1e-12));
        CHECK(med.statistic(scaled(r, c)) ==
              doctest::Approx(c * med.statistic(r)).epsilon(1e-12));
    }
}

TEST_CASE("ec ranks identically to ed when antennas are uncorrelated") {
    icc::ScenarioConfig cfg;
    cfg.set_k(1);
    cfg.m = 6;
    cfg.n = 24;
    cfg.rho = 0.0;
    cfg.set_snr_sense_db(-5.0);
    cfg.validate();

    const Detector ed = Detector::for_scenario(DetectorType::ED, cfg);
    const Detector ec = Detector::for_scenario(DetectorType::EC, cfg);

    RngStream s(21, 0);
    std::vector<double> eds, ecs;
    for (int i = 0; i < 10000; ++i) {
        const auto slot = icc::generate_slot(cfg, i % 2, s);
        eds.push_back(ed.statistic(slot.r[0]));
        ecs.push_back(ec.statistic(slot.r[0]));
    }
    CHECK(icc::spearman(eds, ecs) == 1.0);
}

TEST_CASE("correlated prior separates ec from ed") {
    icc::ScenarioConfig cfg;
    cfg.set_k(1);
    cfg.m = 6;
    cfg.n = 24;
    cfg.rho = 0.7;
    cfg.set_snr_sense_db(-5.0);
    cfg.validate();

    const Detector ed = Detector::for_scenario(DetectorType::ED, cfg);
    const Detector ec = Detector::for_scenario(DetectorType::EC, cfg);
    RngStream s(22, 0);
    std::vector<double> eds, ecs;
    for (int i = 0; i < 2000; ++i) {
        const auto slot = icc::generate_slot(cfg, i % 2, s);
        eds.push_back(ed.statistic(slot.r[0]));
        ecs.push_back(ec.statistic(slot.r[0]));
    }
    const double rank = icc::spearman(eds, ecs);
    CHECK(rank > 0.5);   // still related
    CHECK(rank < 1.0);   // but no longer a monotone transform
}

TEST_CASE("local decision breaks ties toward h0") {
    CHECK(icc::local_decision(1.0, 1.0) == 0);
    CHECK(icc::local_decision(1.0 + 1e-12, 1.0) == 1);
    CHECK(icc::local_decision(0.5, 1.0) == 0);
}

} // TEST_SUITE
