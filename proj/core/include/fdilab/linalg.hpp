#pragma once

#include <vector>

#include "fdilab/types.hpp"

namespace fdilab::linalg {

/// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-8;

struct Svd {
    RVector values;  // descending
    CMatrix U;
    CMatrix V;
};

/// Divide-and-conquer SVD, retried with Jacobi when the result is not finite.
/// `options` takes Eigen's Compute{Thin,Full}{U,V} flags.
Svd svd(const CMatrix& m, unsigned int options = 0);

RVector singular_values(const CMatrix& m);

/// Numerical rank under the relative cutoff `rel_tol * sigma_max`.
int numerical_rank(const CMatrix& m, double rel_tol = kRankTolerance);

/// Moore-Penrose pseudo-inverse via full SVD with the relative rank cutoff.
CMatrix pseudo_inverse(const CMatrix& m, double rel_tol = kRankTolerance);

/// Orthonormal basis (columns) of the nullspace of `m`. An m with zero rows
/// has the identity as nullspace basis.
CMatrix nullspace_basis(const CMatrix& m, Eigen::Index cols, double rel_tol = kRankTolerance);

/// Stack two matrices with the same column count vertically.
CMatrix vstack(const CMatrix& top, const CMatrix& bottom);

/// Sum of column 2-norms.
double l12_norm(const CMatrix& m);

/// Column 2-norms.
RVector column_norms(const CMatrix& m);

bool all_finite(const CMatrix& m);

} // namespace fdilab::linalg
