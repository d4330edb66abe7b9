#include "icc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace icc {

double q_function(double x) {
    return 0.5 * std::erfc(x / 1.4142135623730950488016887242097);
}

ComplexMatrix cholesky(const ComplexMatrix& a) {
    const int n = a.rows();
    if (n != a.cols())
        throw std::invalid_argument("cholesky: matrix not square");
    if (!a.is_hermitian())
        throw std::invalid_argument("cholesky: matrix not Hermitian");

    double diag_scale = 1.0;
    for (int i = 0; i < n; ++i)
        diag_scale = std::max(diag_scale, std::abs(a(i, i)));
    const double clamp_band = 1e-10 * diag_scale;

    ComplexMatrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double pivot = a(j, j).real();
        for (int k = 0; k < j; ++k) pivot -= std::norm(l(j, k));
        if (pivot < -clamp_band)
            throw std::runtime_error("cholesky: negative pivot " + std::to_string(pivot) +
                                     " at index " + std::to_string(j));
        if (pivot <= 0.0) {
            // Semi-definite direction: the whole column collapses.
            l(j, j) = 0.0;
            continue;
        }
        const double d = std::sqrt(pivot);
        l(j, j) = d;
        for (int i = j + 1; i < n; ++i) {
            cdouble s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / d;
        }
    }
    return l;
}

std::vector<cdouble> sample_cscg(RngStream& stream, const std::vector<cdouble>& mean,
                                 const ComplexMatrix& cov) {
    const int n = cov.rows();
    if (static_cast<int>(mean.size()) != n)
        throw std::invalid_argument("sample_cscg: mean length does not match covariance");
    const ComplexMatrix l = cholesky(cov);
    std::vector<cdouble> w(n);
    for (int i = 0; i < n; ++i) w[i] = stream.standard_complex_gaussian();
    std::vector<cdouble> x(mean);
    for (int i = 0; i < n; ++i) {
        cdouble acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += l(i, j) * w[j];
        x[i] += acc;
    }
    return x;
}

namespace {

double offdiag_max(const ComplexMatrix& m) {
    double v = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (i != j) v = std::max(v, std::abs(m(i, j)));
    return v;
}

} // namespace

EigResult hermitian_eig(const ComplexMatrix& a) {
    const int n = a.rows();
    if (n != a.cols())
        throw std::invalid_argument("hermitian_eig: matrix not square");
    if (!a.is_hermitian(1e-10))
        throw std::invalid_argument("hermitian_eig: matrix not Hermitian");

    ComplexMatrix m = a;
    // Symmetrize so rounding asymmetry cannot accumulate across sweeps.
    for (int i = 0; i < n; ++i) {
        m(i, i) = cdouble(m(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cdouble v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }

    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(m.max_abs(), 1e-300);
    const double target = 1e-14 * scale;
    const int max_sweeps = 100;

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (offdiag_max(m) <= target) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cdouble apq = m(p, q);
                const double b = std::abs(apq);
                if (b <= target * 1e-2) continue;
                const cdouble phase = apq / b;  // e^{i beta}
                const double app = m(p, p).real();
                const double aqq = m(q, q).real();
                const double tau = (aqq - app) / (2.0 * b);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(tau * tau + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cdouble se_pos = s * phase;             // s e^{+i beta}
                const cdouble se_neg = s * std::conj(phase);  // s e^{-i beta}

                for (int i = 0; i < n; ++i) {
                    const cdouble mp = m(i, p), mq = m(i, q);
                    m(i, p) = c * mp - se_neg * mq;
                    m(i, q) = se_pos * mp + c * mq;
                }
                for (int j = 0; j < n; ++j) {
                    const cdouble mp = m(p, j), mq = m(q, j);
                    m(p, j) = c * mp - se_pos * mq;
                    m(q, j) = se_neg * mp + c * mq;
                }
                for (int i = 0; i < n; ++i) {
                    const cdouble vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - se_neg * vq;
                    v(i, q) = se_pos * vp + c * vq;
                }
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                m(p, p) = cdouble(m(p, p).real(), 0.0);
                m(q, q) = cdouble(m(q, q).real(), 0.0);
            }
        }
    }
    if (sweep == max_sweeps && offdiag_max(m) > target)
        throw std::runtime_error("hermitian_eig: no convergence after " +
                                 std::to_string(max_sweeps) + " sweeps, residual " +
                                 std::to_string(offdiag_max(m)));

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&m](int i, int j) { return m(i, i).real() > m(j, j).real(); });

    EigResult r;
    r.values.resize(n);
    r.vectors = ComplexMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        r.values[k] = m(order[k], order[k]).real();
        for (int i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
    }
    return r;
}

} // namespace icc
