#pragma once

#include <filesystem>
#include <set>
#include <vector>

#include "fdilab/grid_model.hpp"
#include "fdilab/types.hpp"

namespace fdilab {

struct LrdConfig {
    double lambda = 1.05;
    double rho = 1.0;
    int max_iter = 2000;
    double tol_primal = 1e-7;
    double tol_dual = 1e-7;
    /// A column of C_hat is reported as attacked when its norm exceeds this
    /// fraction of the largest column norm.
    double support_threshold = 0.05;
    /// C_hat counts as identically zero when its largest column norm is at
    /// most this fraction of ||W_bar||_F.
    double zero_tolerance = 1e-6;

    void validate() const;
};

/// Iterates carried between solves (lambda sweeps, restarts).
struct LrdWarmStart {
    CMatrix W_hat;
    CMatrix C_hat;
    CMatrix U;  // scaled dual
};

struct LrdResult {
    CMatrix W_hat;  // N x n
    CMatrix C_hat;  // N x p
    CMatrix U;      // scaled dual, N x n
    int iterations = 0;
    bool converged = false;

    std::vector<double> objective_trace;
    std::vector<double> primal_residual_trace;  // ||W + C H_bar^T - W_bar||_F / ||W_bar||_F
    std::vector<double> dual_residual_trace;    // successive-iterate change, same scaling
    /// Change of the augmented Lagrangian over each primal sweep (W then C,
    /// dual held fixed). Never positive beyond rounding.
    std::vector<double> lagrangian_sweep_change;

    double objective = 0.0;
    double l12_norm = 0.0;
    RVector column_norms;             // per bus
    RVector normalized_column_norms;  // divided by the largest column norm
    std::set<BusId> detected_state_support;
    std::set<int> detected_measurement_support;  // channel indices

    LrdWarmStart warm_start() const { return {W_hat, C_hat, U}; }
};

/// Proximal operator of tau * nuclear norm. Optionally reports the nuclear
/// norm of the result.
CMatrix svt(const CMatrix& M, double tau, double* result_nuclear_norm = nullptr);

/// Proximal operator of tau * (sum of column 2-norms).
CMatrix group_soft_threshold(const CMatrix& M, double tau);

double nuclear_norm(const CMatrix& M);

/// ||W_hat||_* + lambda * ||C_hat||_{1,2}.
double objective_value(const CMatrix& W_hat, const CMatrix& C_hat, double lambda);

/// Solves  min ||W||_* + lambda ||C||_{1,2}  s.t.  W_bar = W + C H_bar^T
/// by linearized ADMM.
LrdResult solve_lrd(const CMatrix& W_bar, const CMatrix& H_bar, const LrdConfig& config,
                    const LrdWarmStart* warm = nullptr);

LrdResult solve_lrd(const CMatrix& W_bar, const JacobianSet& jac, const LrdConfig& config);

struct LambdaSweepPoint {
    double lambda = 0.0;
    double l12_norm = 0.0;
    std::set<BusId> detected_state_support;
    bool converged = false;
    int iterations = 0;
};

/// One solve per lambda (ascending), each warm-started from the previous one
/// unless `warm_start` is false.
std::vector<LambdaSweepPoint> lambda_sweep(const CMatrix& W_bar, const CMatrix& H_bar,
                                           const std::vector<double>& lambdas,
                                           const LrdConfig& config, bool warm_start = true);

std::vector<LambdaSweepPoint> lambda_sweep(const CMatrix& W_bar, const JacobianSet& jac,
                                           const std::vector<double>& lambdas,
                                           const LrdConfig& config, bool warm_start = true);

/// Evenly spaced grid "lo:hi:steps" helper.
std::vector<double> lambda_grid(double lo, double hi, int steps);

void write_lrd_trace_csv(const std::filesystem::path& path, const LrdResult& result);
void write_column_norms_csv(const std::filesystem::path& path, const LrdResult& result);
void write_lambda_sweep_csv(const std::filesystem::path& path,
                            const std::vector<LambdaSweepPoint>& sweep);

} // namespace fdilab
