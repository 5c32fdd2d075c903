#include <gtest/gtest.h>

#include "fdilab/grid_model.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

// Sanity checks on the reference solvers themselves, against closed forms
// that do not involve the library.

using namespace fdilab;
using testing_support::random_complex;

TEST(OracleSvt, DiagonalClosedForm) {
    CMatrix M = CMatrix::Zero(4, 3);
    M(0, 0) = 3.0;
    M(1, 1) = Complex(0.0, 1.0);
    M(2, 2) = 0.2;
    const CMatrix Z = oracle::svt_factored(M, 0.5);
    CMatrix expected = CMatrix::Zero(4, 3);
    expected(0, 0) = 2.5;
    expected(1, 1) = Complex(0.0, 0.5);
    EXPECT_LT((Z - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(OracleSvt, UnitaryInvariance) {
    const CMatrix M = random_complex(1, 6, 4);
    const Eigen::HouseholderQR<CMatrix> qr(random_complex(2, 6, 6));
    const CMatrix Q = qr.householderQ();
    const CMatrix a = oracle::svt_factored(Q * M, 0.4);
    const CMatrix b = Q * oracle::svt_factored(M, 0.4);
    EXPECT_LT((a - b).norm(), 1e-8);
}

TEST(OracleNuclearNorm, Diagonal) {
    CMatrix M = CMatrix::Zero(3, 5);
    M(0, 0) = -2.0;
    M(1, 3) = Complex(3.0, 4.0);
    EXPECT_NEAR(oracle::nuclear_norm_eig(M), 7.0, 1e-12);
    EXPECT_NEAR(oracle::nuclear_norm_eig(M.adjoint()), 7.0, 1e-12);
}

TEST(OracleGroupShrink, ClosedForm) {
    CVector m(2);
    m << Complex(3.0, 0.0), Complex(0.0, 4.0);
    EXPECT_LT((oracle::group_shrink_bisect(m, 1.0) - 0.8 * m).norm(), 1e-12);
    EXPECT_EQ(oracle::group_shrink_bisect(m, 5.0).norm(), 0.0);
    EXPECT_EQ(oracle::group_shrink_bisect(m, 6.0).norm(), 0.0);
}

TEST(OracleLrd, LargeLambdaGivesZero) {
    const CMatrix W = random_complex(3, 6, 5);
    CMatrix H = random_complex(4, 5, 3);
    for (Eigen::Index i = 0; i < H.rows(); ++i) H.row(i).normalize();
    // Every column of H_bar has norm at most sqrt(5) < 3.
    const auto res = oracle::lrd_subgradient(W, H, 3.0, 20000);
    EXPECT_NEAR(res.objective, oracle::nuclear_norm_eig(W), 1e-9);
}

TEST(OracleLrd, ObjectiveNeverAboveStart) {
    const CMatrix W = random_complex(5, 6, 5);
    CMatrix H = random_complex(6, 5, 3);
    for (Eigen::Index i = 0; i < H.rows(); ++i) H.row(i).normalize();
    const auto res = oracle::lrd_subgradient(W, H, 0.5, 20000);
    EXPECT_LE(res.objective, oracle::nuclear_norm_eig(W));
    double l12 = 0.0;
    for (Eigen::Index j = 0; j < res.C.cols(); ++j) l12 += res.C.col(j).norm();
    EXPECT_NEAR(res.objective, oracle::nuclear_norm_eig(W - res.C * H.transpose()) + 0.5 * l12, 1e-10);
}

TEST(OracleFeasibility, ChainByHand) {
    // Chain 1-2-3, no ZIBs, PMU at 1. Channels: V1, I1-2.
    std::istringstream in("bus 1 pmu\nbus 2\nbus 3\nbranch 1 2 1 -5\nbranch 2 3 1 -5\n");
    const JacobianSet jac = build_jacobian(parse_case(in));
    EXPECT_TRUE(oracle::feasible_by_rank(jac, {}, {3}));
    EXPECT_FALSE(oracle::feasible_by_rank(jac, {}, {2}));
    EXPECT_TRUE(oracle::feasible_by_rank(jac, {0}, {2}));  // x1 = x2 keeps I1-2
    EXPECT_TRUE(oracle::feasible_by_rank(jac, {1}, {2}));
    EXPECT_FALSE(oracle::feasible_by_rank(jac, {1}, {1, 2}));
}

TEST(OracleResidual, ConsistentData) {
    const CMatrix H = random_complex(7, 8, 3);
    const CMatrix X = random_complex(8, 4, 3);
    EXPECT_LT(oracle::residual_qr(X * H.transpose(), H).norm(), 1e-12);
}
