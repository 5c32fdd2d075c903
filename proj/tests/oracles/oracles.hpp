#pragma once

// Reference solvers used only by the tests. None of them calls into the
// library code they check, and none of them uses an SVD.

#include <set>
#include <vector>

#include "fdilab/grid_model.hpp"
#include "fdilab/types.hpp"

namespace oracle {

using fdilab::CMatrix;
using fdilab::CVector;

/// argmin_Z tau ||Z||_* + 1/2 ||Z - M||_F^2 through the factored form
/// Z = P Q^* with the penalty tau/2 (||P||^2 + ||Q||^2), minimised by
/// alternating ridge solves.
CMatrix svt_factored(const CMatrix& M, double tau, int iterations = 200000);

/// tau ||Z||_* + 1/2 ||Z - M||_F^2, nuclear norm from the eigenvalues of Z^* Z.
double svt_objective(const CMatrix& Z, const CMatrix& M, double tau);

/// Nuclear norm via the self-adjoint eigen solver on Z^* Z.
double nuclear_norm_eig(const CMatrix& Z);

/// argmin_z tau ||z|| + 1/2 ||z - m||^2 restricted to z = alpha m, alpha in
/// [0, 1], by bisection on the derivative in alpha.
CVector group_shrink_bisect(const CVector& m, double tau);

struct LrdOracleResult {
    CMatrix C;
    double objective = 0.0;
};

/// min_C ||W_bar - C H_bar^T||_* + lambda ||C||_{1,2} by a subgradient
/// method with diminishing steps and restarts from the best point.
LrdOracleResult lrd_subgradient(const CMatrix& W_bar, const CMatrix& H_bar, double lambda,
                                long iterations = 1000000);

/// Exact feasibility by rank comparison: target b is reachable iff adding
/// e_b^T to the uncontrolled-rows-plus-A stack raises its rank. Uses a
/// column-pivoted QR rank.
bool feasible_by_rank(const fdilab::JacobianSet& jac, const std::set<int>& controlled,
                      const std::set<fdilab::BusId>& targets);

/// Least-squares residual W - X H^T with X from a column-pivoted QR solve.
CMatrix residual_qr(const CMatrix& W, const CMatrix& H);

} // namespace oracle
