#include "fdilab/lrd_detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "fdilab/linalg.hpp"

namespace fdilab {

void LrdConfig::validate() const {
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (!(rho > 0.0)) throw InputError("rho must be positive");
    if (max_iter < 1) throw InputError("max_iter must be positive");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw InputError("tolerances must be positive");
    if (support_threshold < 0.0) throw InputError("support_threshold must be nonnegative");
    if (zero_tolerance < 0.0) throw InputError("zero_tolerance must be nonnegative");
}

CMatrix svt(const CMatrix& M, double tau, double* result_nuclear_norm) {
    if (!(tau > 0.0)) throw InputError("svt: tau must be positive");
    if (M.size() == 0) {
        if (result_nuclear_norm) *result_nuclear_norm = 0.0;
        return M;
    }
    const linalg::Svd f = linalg::svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = f.values;
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > tau) ++keep;
    const RVector shrunk = s.head(keep).array() - tau;
    if (result_nuclear_norm) *result_nuclear_norm = shrunk.sum();
    if (keep == 0) return CMatrix::Zero(M.rows(), M.cols());
    return f.U.leftCols(keep) * shrunk.asDiagonal() * f.V.leftCols(keep).adjoint();
}

CMatrix group_soft_threshold(const CMatrix& M, double tau) {
    if (!(tau > 0.0)) throw InputError("group_soft_threshold: tau must be positive");
    CMatrix out(M.rows(), M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        const double norm = M.col(j).norm();
        if (norm <= tau) out.col(j).setZero();
        else out.col(j) = (1.0 - tau / norm) * M.col(j);
    }
    return out;
}

double nuclear_norm(const CMatrix& M) {
    return linalg::singular_values(M).sum();
}

double objective_value(const CMatrix& W_hat, const CMatrix& C_hat, double lambda) {
    return nuclear_norm(W_hat) + lambda * linalg::l12_norm(C_hat);
}

namespace {

void fill_supports(LrdResult& res, const CMatrix& H_bar, const LrdConfig& cfg, double w_norm) {
    res.column_norms = linalg::column_norms(res.C_hat);
    res.l12_norm = res.column_norms.sum();
    res.normalized_column_norms = RVector::Zero(res.column_norms.size());
    const double max_norm = res.column_norms.size() ? res.column_norms.maxCoeff() : 0.0;
    if (max_norm <= cfg.zero_tolerance * w_norm || max_norm == 0.0) return;
    res.normalized_column_norms = res.column_norms / max_norm;
    for (Eigen::Index j = 0; j < res.column_norms.size(); ++j)
        if (res.normalized_column_norms(j) > cfg.support_threshold)
            res.detected_state_support.insert(static_cast<BusId>(j + 1));
    for (Eigen::Index i = 0; i < H_bar.rows(); ++i)
        for (BusId b : res.detected_state_support)
            if (H_bar(i, b - 1) != Complex{0.0, 0.0}) {
                res.detected_measurement_support.insert(static_cast<int>(i));
                break;
            }
}

} // namespace

LrdResult solve_lrd(const CMatrix& W_bar, const CMatrix& H_bar, const LrdConfig& cfg,
                    const LrdWarmStart* warm) {
    cfg.validate();
    if (W_bar.cols() != H_bar.rows())
        throw InputError("W_bar has " + std::to_string(W_bar.cols()) + " columns but H_bar has " +
                         std::to_string(H_bar.rows()) + " rows");
    if (!W_bar.allFinite()) throw NumericalError("W_bar contains NaN or infinite entries");

    const Eigen::Index N = W_bar.rows();
    const Eigen::Index n = W_bar.cols();
    const Eigen::Index p = H_bar.cols();
    const double w_norm = W_bar.norm();

    LrdResult res;
    if (warm) {
        if (warm->W_hat.rows() != N || warm->W_hat.cols() != n || warm->C_hat.rows() != N ||
            warm->C_hat.cols() != p || warm->U.rows() != N || warm->U.cols() != n)
            throw InputError("warm start has the wrong shape");
        res.W_hat = warm->W_hat;
        res.C_hat = warm->C_hat;
        res.U = warm->U;
    } else {
        res.W_hat = CMatrix::Zero(N, n);
        res.C_hat = CMatrix::Zero(N, p);
        res.U = CMatrix::Zero(N, n);
    }

    if (w_norm == 0.0) {
        res.W_hat.setZero();
        res.C_hat.setZero();
        res.U.setZero();
        res.converged = true;
        fill_supports(res, H_bar, cfg, w_norm);
        return res;
    }

    const double L = std::pow(linalg::singular_values(H_bar)(0), 2);
    const CMatrix H_t = H_bar.transpose();
    const CMatrix H_conj = H_bar.conjugate();
    const double rho = cfg.rho;

    CMatrix& W = res.W_hat;
    CMatrix& C = res.C_hat;
    CMatrix& U = res.U;
    CMatrix CH = C * H_t;
    double nuc_w = warm ? nuclear_norm(W) : 0.0;
    double l12_c = linalg::l12_norm(C);

    auto lagrangian = [&](double nuc, double l12, const CMatrix& Wm, const CMatrix& CHm) {
        return nuc + cfg.lambda * l12 + 0.5 * rho * (Wm + CHm - W_bar + U).squaredNorm() -
               0.5 * rho * U.squaredNorm();
    };

    for (int it = 1; it <= cfg.max_iter; ++it) {
        const double before = lagrangian(nuc_w, l12_c, W, CH);

        double nuc_new = 0.0;
        CMatrix W_new = svt(W_bar - CH - U, 1.0 / rho, &nuc_new);

        const CMatrix grad = (W_new + CH - W_bar + U) * H_conj;
        CMatrix C_new = group_soft_threshold(C - grad / L, cfg.lambda / (rho * L));
        CMatrix CH_new = C_new * H_t;
        const double l12_new = linalg::l12_norm(C_new);

        const double after = lagrangian(nuc_new, l12_new, W_new, CH_new);

        const CMatrix r = W_new + CH_new - W_bar;
        const double primal = r.norm() / w_norm;
        const double dual = std::max((W_new - W).norm(), (CH_new - CH).norm()) / w_norm;

        U += r;
        W = std::move(W_new);
        C = std::move(C_new);
        CH = std::move(CH_new);
        nuc_w = nuc_new;
        l12_c = l12_new;

        res.objective_trace.push_back(nuc_w + cfg.lambda * l12_c);
        res.primal_residual_trace.push_back(primal);
        res.dual_residual_trace.push_back(dual);
        res.lagrangian_sweep_change.push_back(after - before);
        res.iterations = it;

        if (!std::isfinite(primal)) throw NumericalError("LRD solver diverged");
        if (primal <= cfg.tol_primal && dual <= cfg.tol_dual) {
            res.converged = true;
            break;
        }
    }

    res.objective = res.objective_trace.empty() ? 0.0 : res.objective_trace.back();
    fill_supports(res, H_bar, cfg, w_norm);
    return res;
}

LrdResult solve_lrd(const CMatrix& W_bar, const JacobianSet& jac, const LrdConfig& config) {
    return solve_lrd(W_bar, jac.H_bar, config);
}

std::vector<LambdaSweepPoint> lambda_sweep(const CMatrix& W_bar, const CMatrix& H_bar,
                                           const std::vector<double>& lambdas,
                                           const LrdConfig& config, bool warm_start) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw InputError("lambda values must be positive");
        if (i > 0 && lambdas[i] < lambdas[i - 1]) throw InputError("lambda values must be ascending");
    }
    std::vector<LambdaSweepPoint> out;
    std::optional<LrdWarmStart> warm;
    for (double lambda : lambdas) {
        LrdConfig cfg = config;
        cfg.lambda = lambda;
        const LrdResult res = solve_lrd(W_bar, H_bar, cfg, warm ? &*warm : nullptr);
        out.push_back({lambda, res.l12_norm, res.detected_state_support, res.converged, res.iterations});
        if (warm_start) warm = res.warm_start();
    }
    return out;
}

std::vector<LambdaSweepPoint> lambda_sweep(const CMatrix& W_bar, const JacobianSet& jac,
                                           const std::vector<double>& lambdas,
                                           const LrdConfig& config, bool warm_start) {
    return lambda_sweep(W_bar, jac.H_bar, lambdas, config, warm_start);
}

std::vector<double> lambda_grid(double lo, double hi, int steps) {
    if (steps < 1 || !(lo > 0.0) || hi < lo) throw InputError("invalid lambda grid");
    std::vector<double> out;
    if (steps == 1) return {lo};
    for (int i = 0; i < steps; ++i) out.push_back(lo + (hi - lo) * i / (steps - 1));
    return out;
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

} // namespace

void write_lrd_trace_csv(const std::filesystem::path& path, const LrdResult& result) {
    auto out = open_out(path);
    out << "iter,objective,primal_residual\n";
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i)
        out << i + 1 << ',' << num(result.objective_trace[i]) << ','
            << num(result.primal_residual_trace[i]) << '\n';
}

void write_column_norms_csv(const std::filesystem::path& path, const LrdResult& result) {
    auto out = open_out(path);
    out << "bus,l2_norm,normalized\n";
    for (Eigen::Index j = 0; j < result.column_norms.size(); ++j)
        out << j + 1 << ',' << num(result.column_norms(j)) << ','
            << num(result.normalized_column_norms(j)) << '\n';
}

void write_lambda_sweep_csv(const std::filesystem::path& path,
                            const std::vector<LambdaSweepPoint>& sweep) {
    auto out = open_out(path);
    out << "lambda,l12_norm,converged,iterations,support\n";
    for (const auto& pt : sweep) {
        out << num(pt.lambda) << ',' << num(pt.l12_norm) << ',' << (pt.converged ? 1 : 0) << ','
            << pt.iterations << ',';
        bool first = true;
        for (BusId b : pt.detected_state_support) {
            out << (first ? "" : " ") << b;
            first = false;
        }
        out << '\n';
    }
}

} // namespace fdilab
