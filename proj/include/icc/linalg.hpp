#pragma once

#include "icc/complex_matrix.hpp"
#include "icc/rng.hpp"

#include <vector>

namespace icc {

struct EigResult {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // columns, matching order
};

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations. Eigenvalues are returned in descending order with matching
/// eigenvector columns. Throws on non-Hermitian input (tolerance relative
/// to max|a|) and on failure to converge.
EigResult hermitian_eig(const ComplexMatrix& a);

/// Lower Cholesky factor of a Hermitian positive semi-definite matrix.
/// Pivots in [-1e-10, 0] (relative to the diagonal scale) are treated as
/// exact zeros so PSD inputs with rounding noise factor cleanly; a pivot
/// below that band throws, naming the offending index.
ComplexMatrix cholesky(const ComplexMatrix& a);

/// One draw from CN(mean, cov): mean + L w with cov = L L^H and w having
/// i.i.d. unit-variance circularly symmetric complex Gaussian entries.
std::vector<cdouble> sample_cscg(RngStream& stream, const std::vector<cdouble>& mean,
                                 const ComplexMatrix& cov);

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
double q_function(double x);

} // namespace icc
