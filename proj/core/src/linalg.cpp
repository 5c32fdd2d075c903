#include "fdilab/linalg.hpp"

#include <algorithm>

namespace fdilab::linalg {

namespace {

int rank_from_values(const RVector& s, double rel_tol) {
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    const double cutoff = rel_tol * s(0);
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) ++r;
    return r;
}

} // namespace

Svd svd(const CMatrix& m, unsigned int options) {
    Svd out;
    {
        Eigen::BDCSVD<CMatrix> dc(m, options);
        out.values = dc.singularValues();
        if (dc.computeU()) out.U = dc.matrixU();
        if (dc.computeV()) out.V = dc.matrixV();
    }
    if (out.values.allFinite() && out.U.allFinite() && out.V.allFinite()) return out;
    Eigen::JacobiSVD<CMatrix> jac(m, options);
    out.values = jac.singularValues();
    out.U = jac.computeU() ? CMatrix(jac.matrixU()) : CMatrix{};
    out.V = jac.computeV() ? CMatrix(jac.matrixV()) : CMatrix{};
    if (!out.values.allFinite() || !out.U.allFinite() || !out.V.allFinite())
        throw NumericalError("SVD failed to produce finite factors");
    return out;
}

RVector singular_values(const CMatrix& m) {
    if (m.size() == 0) return RVector{};
    return svd(m).values;
}

int numerical_rank(const CMatrix& m, double rel_tol) {
    return rank_from_values(singular_values(m), rel_tol);
}

CMatrix pseudo_inverse(const CMatrix& m, double rel_tol) {
    if (m.size() == 0) return CMatrix::Zero(m.cols(), m.rows());
    const Svd f = svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = f.values;
    const int r = rank_from_values(s, rel_tol);
    const auto U = f.U.leftCols(r);
    const auto V = f.V.leftCols(r);
    RVector inv = s.head(r).cwiseInverse();
    return V * inv.asDiagonal() * U.adjoint();
}

CMatrix nullspace_basis(const CMatrix& m, Eigen::Index cols, double rel_tol) {
    if (m.rows() == 0) return CMatrix::Identity(cols, cols);
    const Svd f = svd(m, Eigen::ComputeFullV);
    const int r = rank_from_values(f.values, rel_tol);
    return f.V.rightCols(cols - r);
}

CMatrix vstack(const CMatrix& top, const CMatrix& bottom) {
    if (top.rows() == 0) return bottom;
    if (bottom.rows() == 0) return top;
    if (top.cols() != bottom.cols())
        throw InputError("vstack: column count mismatch");
    CMatrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

double l12_norm(const CMatrix& m) {
    return column_norms(m).sum();
}

RVector column_norms(const CMatrix& m) {
    RVector out(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(j) = m.col(j).norm();
    return out;
}

bool all_finite(const CMatrix& m) {
    return m.allFinite();
}

} // namespace fdilab::linalg
