#include "icc/complex_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace icc {

ComplexMatrix::ComplexMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, cdouble(0.0, 0.0)) {
    if (rows < 0 || cols < 0)
        throw std::invalid_argument("ComplexMatrix: negative dimension");
}

ComplexMatrix ComplexMatrix::identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

cdouble ComplexMatrix::trace() const {
    cdouble t = 0.0;
    const int n = rows_ < cols_ ? rows_ : cols_;
    for (int i = 0; i < n; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& z : a_) {
        const double v = std::abs(z);
        if (v > m) m = v;
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            r(j, i) = std::conj((*this)(i, j));
    return r;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
    if (cols_ != rhs.rows_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in product");
    ComplexMatrix r(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int k = 0; k < cols_; ++k) {
            const cdouble aik = (*this)(i, k);
            if (aik == cdouble(0.0, 0.0)) continue;
            for (int j = 0; j < rhs.cols_; ++j)
                r(i, j) += aik * rhs(k, j);
        }
    }
    return r;
}

ComplexMatrix ComplexMatrix::operator+(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in sum");
    ComplexMatrix r = *this;
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += rhs.a_[i];
    return r;
}

ComplexMatrix ComplexMatrix::operator-(const ComplexMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("ComplexMatrix: dimension mismatch in difference");
    ComplexMatrix r = *this;
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] -= rhs.a_[i];
    return r;
}

bool ComplexMatrix::is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    const double scale = max_abs();
    const double bound = tol * (scale > 0.0 ? scale : 1.0);
    for (int i = 0; i < rows_; ++i)
        for (int j = i; j < cols_; ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > bound) return false;
    return true;
}

} // namespace icc
