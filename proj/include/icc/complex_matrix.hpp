#pragma once

#include <complex>
#include <vector>

namespace icc {

using cdouble = std::complex<double>;

/// Dense row-major complex matrix, sized for per-sensor covariances
/// (tens of rows, not thousands).
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(int rows, int cols);

    static ComplexMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cdouble& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
    const cdouble& operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }

    const std::vector<cdouble>& data() const { return a_; }
    std::vector<cdouble>& data() { return a_; }

    cdouble trace() const;
    double max_abs() const;

    ComplexMatrix adjoint() const;
    ComplexMatrix operator*(const ComplexMatrix& rhs) const;
    ComplexMatrix operator+(const ComplexMatrix& rhs) const;
    ComplexMatrix operator-(const ComplexMatrix& rhs) const;

    /// max |A - A^H| <= tol * max|A| (absolute when the matrix is zero).
    bool is_hermitian(double tol = 1e-12) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<cdouble> a_;
};

} // namespace icc
