#include "fdilab/estimation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "fdilab/linalg.hpp"

namespace fdilab {

StateEstimator::StateEstimator(const JacobianSet& jac) : jac_(&jac) {
    if (jac.p() == 0 || linalg::numerical_rank(jac.H) < jac.p())
        throw NumericalError("unobservable system: rank(H) < " + std::to_string(jac.p()));
    h_pinv_ = linalg::pseudo_inverse(jac.H);
    // H^+ (H^+)^* = (H^* H)^{-1} for full column rank H.
    zib_cov_ = jac.A * h_pinv_ * h_pinv_.adjoint() * jac.A.adjoint();
}

void StateEstimator::check_shape(const CMatrix& W) const {
    if (W.cols() != jac_->n())
        throw InputError("measurement matrix has " + std::to_string(W.cols()) +
                         " columns, Jacobian has " + std::to_string(jac_->n()) + " channels");
}

CMatrix StateEstimator::estimate(const CMatrix& W) const {
    check_shape(W);
    return W * h_pinv_.transpose();
}

CMatrix StateEstimator::residual(const CMatrix& W) const {
    check_shape(W);
    return W - estimate(W) * jac_->H.transpose();
}

CMatrix StateEstimator::enhanced_residual(const CMatrix& W) const {
    check_shape(W);
    const CMatrix x_bar = estimate(W);
    CMatrix out(W.rows(), jac_->n() + jac_->k());
    out.leftCols(jac_->n()) = W - x_bar * jac_->H.transpose();
    out.rightCols(jac_->k()) = x_bar * jac_->A.transpose();
    return out;
}

CMatrix estimate_states(const CMatrix& W, const JacobianSet& jac) {
    return StateEstimator(jac).estimate(W);
}

CMatrix conventional_residual(const CMatrix& W, const JacobianSet& jac) {
    return StateEstimator(jac).residual(W);
}

CMatrix enhanced_residual(const CMatrix& W_bar, const JacobianSet& jac) {
    return StateEstimator(jac).enhanced_residual(W_bar);
}

namespace {

void validate(const BddConfig& config) {
    if (config.noise_sigma < 0.0) throw InputError("noise_sigma must be nonnegative");
    if (config.noise_sigma > 0.0 && !(config.alpha > 0.0 && config.alpha < 1.0))
        throw InputError("alpha must lie in (0, 1)");
}

BddReport decide(std::vector<double> stat, double threshold, int dof) {
    BddReport rep;
    rep.statistic = std::move(stat);
    rep.threshold = threshold;
    rep.degrees_of_freedom = dof;
    for (std::size_t t = 0; t < rep.statistic.size(); ++t)
        if (rep.statistic[t] > threshold) rep.flagged_rows.push_back(static_cast<int>(t) + 1);
    rep.flagged = !rep.flagged_rows.empty();
    return rep;
}

// With no redundancy the residual vanishes identically; only rounding is left,
// so the noiseless tolerance applies.
double chi2_threshold(int dof, double alpha, double per_component, double noiseless_tolerance) {
    if (dof <= 0) return noiseless_tolerance / per_component;
    boost::math::chi_squared dist(dof);
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

} // namespace

BddReport conventional_bdd(const CMatrix& W, const JacobianSet& jac, const BddConfig& config) {
    validate(config);
    const CMatrix R = StateEstimator(jac).residual(W);
    std::vector<double> stat(static_cast<std::size_t>(R.rows()));
    if (config.noise_sigma == 0.0) {
        for (Eigen::Index t = 0; t < R.rows(); ++t)
            stat[static_cast<std::size_t>(t)] = R.row(t).squaredNorm();
        return decide(std::move(stat), config.noiseless_tolerance, 0);
    }
    // Each real component carries variance sigma^2 / 2.
    const double per_component = config.noise_sigma * config.noise_sigma / 2.0;
    for (Eigen::Index t = 0; t < R.rows(); ++t)
        stat[static_cast<std::size_t>(t)] = R.row(t).squaredNorm() / per_component;
    const int dof = 2 * (jac.n() - jac.p());
    return decide(std::move(stat),
                  chi2_threshold(dof, config.alpha, per_component, config.noiseless_tolerance), dof);
}

BddReport enhanced_bdd(const CMatrix& W_bar, const JacobianSet& jac, const BddConfig& config) {
    validate(config);
    const StateEstimator est(jac);
    const CMatrix Re = est.enhanced_residual(W_bar);
    const int n = jac.n();
    const int k = jac.k();
    std::vector<double> stat(static_cast<std::size_t>(Re.rows()));
    if (config.noise_sigma == 0.0) {
        for (Eigen::Index t = 0; t < Re.rows(); ++t)
            stat[static_cast<std::size_t>(t)] = Re.row(t).squaredNorm();
        return decide(std::move(stat), config.noiseless_tolerance, 0);
    }
    const double per_component = config.noise_sigma * config.noise_sigma / 2.0;
    // The ZIB block is whitened with its own covariance; it is independent of
    // the conventional residual because H^+ (I - H H^+) = 0.
    Eigen::LLT<CMatrix> chol;
    if (k > 0) {
        chol.compute(est.zib_block_covariance());
        if (chol.info() != Eigen::Success)
            throw NumericalError("ZIB residual covariance is not positive definite");
    }
    for (Eigen::Index t = 0; t < Re.rows(); ++t) {
        double s = Re.row(t).head(n).squaredNorm();
        if (k > 0) {
            const CVector z = Re.row(t).tail(k).transpose();
            s += chol.matrixL().solve(z).squaredNorm();
        }
        stat[static_cast<std::size_t>(t)] = s / per_component;
    }
    const int dof = 2 * (n - jac.p()) + 2 * k;
    return decide(std::move(stat),
                  chi2_threshold(dof, config.alpha, per_component, config.noiseless_tolerance), dof);
}

void write_bdd_csv(std::ostream& out, const BddReport& report) {
    out << "t,statistic,flagged\n";
    std::size_t next = 0;
    for (std::size_t t = 0; t < report.statistic.size(); ++t) {
        bool flagged = next < report.flagged_rows.size() &&
                       report.flagged_rows[next] == static_cast<int>(t) + 1;
        if (flagged) ++next;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", report.statistic[t]);
        out << t + 1 << ',' << buf << ',' << (flagged ? 1 : 0) << '\n';
    }
}

void write_bdd_csv(const std::filesystem::path& path, const BddReport& report) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_bdd_csv(out, report);
}

} // namespace fdilab
