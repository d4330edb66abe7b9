#include <doctest.h>

#include "icc/linalg.hpp"
#include "icc/rng.hpp"
#include "icc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

using icc::cdouble;
using icc::ComplexMatrix;
using icc::RngStream;

namespace {

ComplexMatrix random_hermitian(int m, RngStream& s) {
    ComplexMatrix a(m, m);
    for (int p = 0; p < m; ++p) {
        a(p, p) = cdouble(2.0 * s.uniform() - 1.0, 0.0);
        for (int q = p + 1; q < m; ++q) {
            a(p, q) = cdouble(2.0 * s.uniform() - 1.0, 2.0 * s.uniform() - 1.0);
            a(q, p) = std::conj(a(p, q));
        }
    }
    return a;
}

ComplexMatrix random_psd(int m, RngStream& s) {
    ComplexMatrix b(m, m);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            b(p, q) = cdouble(2.0 * s.uniform() - 1.0, 2.0 * s.uniform() - 1.0);
    return b * b.adjoint();
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).max_abs();
}

// Characteristic polynomial coefficients via the trace recursion
// (Faddeev-LeVerrier): p(x) = x^m + c1 x^{m-1} + ... + cm.
std::vector<cdouble> char_poly(const ComplexMatrix& a) {
    const int m = a.rows();
    std::vector<cdouble> c(static_cast<size_t>(m) + 1);
    c[0] = 1.0;
    ComplexMatrix mk = ComplexMatrix::identity(m);  // M_0
    for (int k = 1; k <= m; ++k) {
        if (k > 1) {
            ComplexMatrix am = a * mk;
            for (int i = 0; i < m; ++i) am(i, i) += c[static_cast<size_t>(k) - 1];
            mk = am;
        }
        const ComplexMatrix amk = a * mk;
        c[static_cast<size_t>(k)] = -amk.trace() / static_cast<double>(k);
    }
    return c;
}

// Durand-Kerner simultaneous root iteration on a monic polynomial.
std::vector<cdouble> poly_roots(const std::vector<cdouble>& coeffs) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    auto eval = [&](cdouble x) {
        cdouble acc = 0.0;
        for (const cdouble& c : coeffs) acc = acc * x + c;
        return acc;
    };
    std::vector<cdouble> r(static_cast<size_t>(deg));
    for (int i = 0; i < deg; ++i)
        r[static_cast<size_t>(i)] = std::pow(cdouble(0.4, 0.9), i + 1);
    for (int it = 0; it < 500; ++it) {
        double worst = 0.0;
        for (int i = 0; i < deg; ++i) {
            cdouble denom = 1.0;
            for (int j = 0; j < deg; ++j)
                if (j != i) denom *= r[static_cast<size_t>(i)] - r[static_cast<size_t>(j)];
            const cdouble step = eval(r[static_cast<size_t>(i)]) / denom;
            r[static_cast<size_t>(i)] -= step;
            worst = std::max(worst, std::abs(step));
        }
        if (worst < 1e-13) break;
    }
    return r;
}

} // namespace

TEST_SUITE("numerics") {

TEST_CASE("counter streams are independent of interleaving") {
    RngStream a1(7, 1), b(7, 2);
    std::vector<uint64_t> plain;
    for (int i = 0; i < 16; ++i) plain.push_back(a1.next_u64());

    RngStream a2(7, 1);
    for (int i = 0; i < 16; ++i) {
        (void)b.next_u64();
        CHECK(a2.next_u64() == plain[static_cast<size_t>(i)]);
        (void)b.uniform();
    }

    // same (seed, stream, counter) -> same draw, different stream -> different
    RngStream a3(7, 1);
    CHECK(a3.next_u64() == plain[0]);
    RngStream c(7, 3);
    CHECK(c.next_u64() != plain[0]);
    RngStream d(8, 1);
    CHECK(d.next_u64() != plain[0]);
}

TEST_CASE("uniform stays inside the open interval and has the right mean") {
    RngStream s(1, 0);
    const int n = 1000000;
    double acc = 0.0;
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        acc += u;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(acc / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("normal and complex gaussian moments") {
    RngStream s(2, 0);
    const int n = 400000;
    double m1 = 0.0, m2 = 0.0, cpow = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.standard_normal();
        m1 += x;
        m2 += x * x;
        cpow += std::norm(s.standard_complex_gaussian());
    }
    CHECK(m1 / n == doctest::Approx(0.0).epsilon(0.01));
    CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(cpow / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("gaussian tail values") {
    CHECK(icc::q_function(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(icc::q_function(1.6448536269514722) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(icc::q_function(-1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-9));
    CHECK(icc::q_function(3.0) == doctest::Approx(0.0013498980316300933).epsilon(1e-10));
}

TEST_CASE("cholesky round trip on random PSD matrices") {
    RngStream s(3, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(s.uniform() * 8.0);
        const ComplexMatrix a = random_psd(m, s);
        const ComplexMatrix l = icc::cholesky(a);
        const double scale = std::max(a.max_abs(), 1.0);
        CHECK(max_abs_diff(l * l.adjoint(), a) <= 1e-10 * scale);
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) CHECK(l(p, q) == cdouble(0.0, 0.0));
    }
}

TEST_CASE("cholesky rejects indefinite input") {
    ComplexMatrix a = ComplexMatrix::identity(2);
    a(1, 1) = -1.0;
    CHECK_THROWS(icc::cholesky(a));
}

TEST_CASE("eigendecomposition reconstructs 1000 random Hermitian matrices") {
    RngStream s(4, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 2 + static_cast<int>(s.uniform() * 15.0);
        const ComplexMatrix a = random_hermitian(m, s);
        const icc::EigResult e = icc::hermitian_eig(a);

        REQUIRE(static_cast<int>(e.values.size()) == m);
        for (int i = 1; i < m; ++i)
            CHECK(e.values[static_cast<size_t>(i - 1)] >= e.values[static_cast<size_t>(i)]);

        ComplexMatrix vd = e.vectors;
        for (int q = 0; q < m; ++q)
            for (int p = 0; p < m; ++p) vd(p, q) *= e.values[static_cast<size_t>(q)];
        const double scale = std::max(a.max_abs(), 1e-3);
        CHECK(max_abs_diff(vd * e.vectors.adjoint(), a) <= 1e-10 * scale);
        CHECK(max_abs_diff(e.vectors * e.vectors.adjoint(), ComplexMatrix::identity(m)) <=
              1e-10);
    }
}

TEST_CASE("eigenvalues match characteristic polynomial roots for small sizes") {
    RngStream s(5, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + trial % 3;  // 2..4
        const ComplexMatrix a = random_hermitian(m, s);
        const icc::EigResult e = icc::hermitian_eig(a);
        std::vector<cdouble> roots = poly_roots(char_poly(a));
        std::vector<double> real_roots;
        for (const cdouble& r : roots) {
            CHECK(std::abs(r.imag()) < 1e-8);
            real_roots.push_back(r.real());
        }
        std::sort(real_roots.rbegin(), real_roots.rend());
        for (int i = 0; i < m; ++i)
            CHECK(std::abs(e.values[static_cast<size_t>(i)] -
                           real_roots[static_cast<size_t>(i)]) <= 1e-8);
    }
}

TEST_CASE("eig rejects non-hermitian input") {
    ComplexMatrix a(2, 2);
    a(0, 1) = cdouble(1.0, 0.0);
    a(1, 0) = cdouble(0.5, 0.0);
    CHECK_THROWS(icc::hermitian_eig(a));
}

TEST_CASE("cscg sampler hits the requested covariance") {
    RngStream s(6, 0);
    ComplexMatrix cov(2, 2);
    cov(0, 0) = 2.0;
    cov(1, 1) = 1.0;
    cov(0, 1) = cdouble(0.5, 0.3);
    cov(1, 0) = std::conj(cov(0, 1));
    const std::vector<cdouble> mean{cdouble(1.0, -1.0), cdouble(0.0, 2.0)};

    const int n = 200000;
    std::vector<cdouble> acc(2);
    ComplexMatrix est(2, 2);
    for (int i = 0; i < n; ++i) {
        const auto x = icc::sample_cscg(s, mean, cov);
        for (int p = 0; p < 2; ++p) acc[static_cast<size_t>(p)] += x[static_cast<size_t>(p)];
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
                est(p, q) += (x[static_cast<size_t>(p)] - mean[static_cast<size_t>(p)]) *
                             std::conj(x[static_cast<size_t>(q)] - mean[static_cast<size_t>(q)]);
    }
    for (int p = 0; p < 2; ++p)
        CHECK(std::abs(acc[static_cast<size_t>(p)] / static_cast<double>(n) -
                       mean[static_cast<size_t>(p)]) < 0.02);
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
            CHECK(std::abs(est(p, q) / static_cast<double>(n) - cov(p, q)) < 0.03);
}

TEST_CASE("spearman exactness and tie handling") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    CHECK(icc::spearman(x, {10.0, 20.0, 30.0, 40.0}) == 1.0);
    CHECK(icc::spearman(x, {8.0, 6.0, 4.0, 2.0}) == -1.0);
    // monotone transform leaves ranks alone
    CHECK(icc::spearman(x, {std::exp(1.0), std::exp(2.0), std::exp(3.0), std::exp(4.0)}) == 1.0);
    CHECK_THROWS(icc::spearman(x, {5.0, 5.0, 5.0, 5.0}));
    const double mid = icc::spearman({1.0, 2.0, 3.0, 4.0}, {1.0, 3.0, 2.0, 4.0});
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
}

TEST_CASE("percentile uses the ceil(q*n) order statistic") {
    const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    CHECK(icc::percentile(v, 0.5) == 0.5);
    CHECK(icc::percentile(v, 0.05) == 0.1);
    CHECK(icc::percentile(v, 0.11) == 0.2);
    CHECK(icc::percentile(v, 1.0) == 1.0);
    CHECK(icc::percentile(v, 0.0) == 0.1);  // clamped to the first order statistic
}

TEST_CASE("binomial helpers") {
    CHECK(icc::log_binomial(6, 3) == doctest::Approx(std::log(20.0)).epsilon(1e-12));
    CHECK(std::abs(icc::log_binomial(6, 0)) <= 1e-12);
    // direct sum cross-check
    const double tail = icc::binomial_tail(6, 0.5, 4);
    CHECK(tail == doctest::Approx(22.0 / 64.0).epsilon(1e-12));
    CHECK(icc::binomial_tail(6, 0.3, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(icc::binomial_stderr(0.5, 10000) == doctest::Approx(0.005).epsilon(1e-9));
}

TEST_CASE("mean and variance") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(icc::mean(v) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(icc::variance(v) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}

} // TEST_SUITE
