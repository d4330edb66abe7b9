#include <doctest.h>

#include "icc/airmodel.hpp"
#include "icc/scenario.hpp"
#include "icc/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

using icc::cdouble;
using icc::RngStream;
using icc::ScenarioConfig;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("airmodel") {

TEST_CASE("scenario json round trip preserves every field") {
    ScenarioConfig cfg;
    cfg.set_k(3);
    cfg.m = 12;
    cfg.n = 64;
    cfg.set_snr_sense_db(-7.5);
    cfg.set_snr_report_db(2.25);
    cfg.rho = 0.3;
    cfg.k_factor_db = kInf;
    cfg.iota = 0.8;
    cfg.nu = 2.5;
    cfg.distances = {1.0, 2.0, 0.5};
    cfg.snr_sense_db_per_sensor = std::vector<double>{-7.5, -8.0, -6.0};

    const ScenarioConfig back = ScenarioConfig::from_json_string(cfg.to_json_string());
    CHECK(back.k == cfg.k);
    CHECK(back.m == cfg.m);
    CHECK(back.n == cfg.n);
    CHECK(back.snr_sense_db == cfg.snr_sense_db);
    CHECK(back.snr_report_db == cfg.snr_report_db);
    CHECK(back.sigma_u2_sense == cfg.sigma_u2_sense);
    CHECK(back.sigma_u2_report == cfg.sigma_u2_report);
    CHECK(back.rho == cfg.rho);
    CHECK(back.k_factor_db == kInf);
    CHECK(back.iota == cfg.iota);
    CHECK(back.nu == cfg.nu);
    CHECK(back.distances == cfg.distances);
    REQUIRE(back.snr_sense_db_per_sensor.has_value());
    CHECK(*back.snr_sense_db_per_sensor == *cfg.snr_sense_db_per_sensor);

    // negative infinity also survives
    cfg.k_factor_db = -kInf;
    CHECK(ScenarioConfig::from_json_string(cfg.to_json_string()).k_factor_db == -kInf);
}

TEST_CASE("scenario json rejects unknown fields and incoherent powers") {
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json_string(R"({"bogus": 1})"),
                         doctest::Contains("bogus"), std::invalid_argument);

    ScenarioConfig cfg;
    cfg.sigma_u2_sense *= 2.0;  // now disagrees with snr_sense_db
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    ScenarioConfig bad;
    bad.rho = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ScenarioConfig{};
    bad.iota = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("antenna correlation matrix entries") {
    const auto r = icc::antenna_correlation(4, 0.5);
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
            CHECK(r(p, q).real() == doctest::Approx(std::pow(0.5, std::abs(p - q))).epsilon(1e-15));
            CHECK(r(p, q).imag() == 0.0);
        }
    const auto id = icc::antenna_correlation(3, 0.0);
    CHECK((id - icc::ComplexMatrix::identity(3)).max_abs() == 0.0);
}

TEST_CASE("slot covariance traces match the configured powers") {
    ScenarioConfig cfg;
    cfg.set_k(2);
    cfg.m = 4;
    cfg.n = 32;
    cfg.rho = 0.5;
    cfg.set_snr_sense_db(0.0);

    RngStream s(11, 0);
    const int slots = 3000;
    double acc_h0 = 0.0, acc_h1 = 0.0;
    for (int i = 0; i < slots; ++i) {
        const auto s0 = icc::generate_slot(cfg, 0, s);
        const auto s1 = icc::generate_slot(cfg, 1, s);
        REQUIRE(s0.r.size() == 2);
        REQUIRE(s0.r[0].rows() == 4);
        CHECK(s0.label == 0);
        CHECK(s1.label == 1);
        for (const auto& r : s0.r) acc_h0 += r.trace().real() / 4.0;
        for (const auto& r : s1.r) acc_h1 += r.trace().real() / 4.0;
        CHECK(s0.r[0].is_hermitian(1e-10));
    }
    acc_h0 /= 2.0 * slots;
    acc_h1 /= 2.0 * slots;
    CHECK(acc_h0 == doctest::Approx(cfg.sigma_u2_sense).epsilon(0.03));
    CHECK(acc_h1 ==
          doctest::Approx(cfg.sigma_h2 * cfg.sigma_s2 + cfg.sigma_u2_sense).epsilon(0.03));
}

TEST_CASE("per sensor sensing noise overrides take effect") {
    ScenarioConfig cfg;
    cfg.set_k(2);
    cfg.m = 2;
    cfg.n = 16;
    cfg.set_snr_sense_db(0.0);
    cfg.snr_sense_db_per_sensor = std::vector<double>{0.0, -10.0};
    cfg.validate();
    CHECK(cfg.sigma_u2_sense_for(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cfg.sigma_u2_sense_for(1) == doctest::Approx(10.0).epsilon(1e-12));

    RngStream s(12, 0);
    double t0 = 0.0, t1 = 0.0;
    const int slots = 4000;
    for (int i = 0; i < slots; ++i) {
        const auto slot = icc::generate_slot(cfg, 0, s);
        t0 += slot.r[0].trace().real() / 2.0;
        t1 += slot.r[1].trace().real() / 2.0;
    }
    CHECK(t0 / slots == doctest::Approx(1.0).epsilon(0.05));
    CHECK(t1 / slots == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("channel estimate is exact at iota = 1") {
    RngStream s(13, 0);
    const cdouble h(0.7, -0.2);
    CHECK(icc::estimate_channel(h, 1.0, s) == h);
    CHECK_THROWS(icc::estimate_channel(h, 0.0, s));
    // iota < 1: estimate correlates but differs
    const cdouble e = icc::estimate_channel(h, 0.9, s);
    CHECK(e != h);
}

TEST_CASE("perfect csi inverts the fade exactly") {
    ScenarioConfig cfg;
    cfg.kappa = 2.0;
    cfg.iota = 1.0;
    cfg.set_snr_report_db(cfg.snr_report_db);  // keep powers coherent with kappa
    cfg.validate();
    RngStream s(14, 0);
    for (int i = 0; i < 50; ++i) {
        const auto draw = icc::draw_precoded_link(cfg, 0, s);
        CHECK(draw.gain.real() == std::sqrt(2.0));
        CHECK(draw.gain.imag() == 0.0);
        CHECK(draw.h_est == draw.h_true);
    }
}

TEST_CASE("noiseless aircomp is the exact average of precoded symbols") {
    ScenarioConfig cfg;
    cfg.set_k(3);
    cfg.set_snr_report_db(kInf);  // zero receiver noise
    cfg.validate();
    CHECK(cfg.sigma_u2_report == 0.0);

    std::vector<std::vector<cdouble>> ys(3, std::vector<cdouble>(4));
    RngStream fill(15, 0);
    for (auto& row : ys)
        for (auto& v : row) v = fill.standard_complex_gaussian();

    RngStream s(15, 1);
    const auto rep = icc::report_aircomp(ys, cfg, s);
    REQUIRE(rep.aggregated.has_value());
    REQUIRE(rep.channel_draws.size() == 3);
    for (size_t j = 0; j < 4; ++j) {
        cdouble manual(0.0, 0.0);
        for (size_t k = 0; k < 3; ++k) manual += rep.channel_draws[k].gain * ys[k][j];
        manual *= 1.0 / 3.0;
        CHECK((*rep.aggregated)[j] == manual);
    }
}

TEST_CASE("k=1 aircomp and orthogonal reporting coincide bitwise") {
    ScenarioConfig cfg;
    cfg.set_k(1);
    cfg.set_snr_report_db(4.0);
    cfg.validate();
    std::vector<std::vector<cdouble>> ys{{cdouble(0.3, -0.1), cdouble(-1.2, 0.4)}};

    RngStream s1(16, 0), s2(16, 0);
    const auto a = icc::report_aircomp(ys, cfg, s1);
    const auto o = icc::report_orthogonal(ys, cfg, s2);
    REQUIRE(a.aggregated.has_value());
    REQUIRE(o.per_sensor.has_value());
    for (size_t j = 0; j < 2; ++j) CHECK((*a.aggregated)[j] == (*o.per_sensor)[0][j]);
}

TEST_CASE("bpsk flip rate matches the closed form at 3 dB") {
    ScenarioConfig cfg;
    cfg.iota = 1.0;
    cfg.k_factor_db = kInf;  // no fading: the ideal reporting link
    cfg.set_snr_report_db(3.0);
    cfg.validate();

    const long long nbits = 1000000;
    std::vector<uint8_t> sent(static_cast<size_t>(nbits), 0);
    RngStream s(17, 0);
    const auto got = icc::bpsk_channel(sent, cfg, s);
    long long flips = 0;
    for (uint8_t b : got) flips += b;
    const double rate = static_cast<double>(flips) / static_cast<double>(nbits);

    const double expected = 0.02287840756108534;  // Q(sqrt(2 * 10^0.3))
    const double se = icc::binomial_stderr(expected, nbits);
    CHECK(std::abs(rate - expected) <= 3.0 * se);
}

TEST_CASE("bpsk is transparent on a noiseless link") {
    ScenarioConfig cfg;
    cfg.iota = 1.0;
    cfg.k_factor_db = kInf;
    cfg.set_snr_report_db(kInf);
    cfg.validate();
    const std::vector<uint8_t> bits{0, 1, 1, 0, 1, 0, 0, 1};
    RngStream s(18, 0);
    CHECK(icc::bpsk_channel(bits, cfg, s) == bits);
}

TEST_CASE("importance sampled ber agrees with theory deep in the tail") {
    ScenarioConfig cfg;
    cfg.iota = 1.0;
    cfg.k_factor_db = kInf;
    cfg.set_snr_report_db(9.0);
    cfg.validate();

    RngStream s(19, 0);
    const auto r = icc::ber_importance_sampled(cfg, 400000, s);
    const double expected = 3.362722841961758e-05;  // Q(sqrt(2 * 10^0.9))
    CHECK(std::abs(r.ber - expected) <= 3.0 * r.stderr_is);
    CHECK(r.stderr_is < expected);                  // meaningfully resolved
    CHECK(r.equivalent_bits > 50000000.0);          // far beyond the draw count
}

TEST_CASE("reporting symbol blocks are validated") {
    ScenarioConfig cfg;
    cfg.set_k(2);
    RngStream s(20, 0);
    std::vector<std::vector<cdouble>> wrong_k(1, std::vector<cdouble>(2));
    CHECK_THROWS(icc::report_aircomp(wrong_k, cfg, s));
    std::vector<std::vector<cdouble>> ragged{{cdouble(1, 0)}, {cdouble(1, 0), cdouble(0, 1)}};
    CHECK_THROWS(icc::report_orthogonal(ragged, cfg, s));
}

} // TEST_SUITE
