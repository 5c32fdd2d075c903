#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "fdilab/grid_model.hpp"
#include "fdilab/types.hpp"

namespace fdilab {

/// Pseudo-inverse of H and the derived projections, computed once per Jacobian.
class StateEstimator {
public:
    /// Throws NumericalError("unobservable system") when rank(H) < p.
    explicit StateEstimator(const JacobianSet& jac);

    const JacobianSet& jacobian() const { return *jac_; }
    const CMatrix& pinv() const { return h_pinv_; }

    /// X_hat = W (H^+)^T.
    CMatrix estimate(const CMatrix& W) const;

    /// R = W - X_hat H^T.
    CMatrix residual(const CMatrix& W) const;

    /// [R, X_bar A^T], N x (n + k).
    CMatrix enhanced_residual(const CMatrix& W) const;

    /// Covariance factor of the ZIB block per unit noise variance: A (H^*H)^{-1} A^*.
    const CMatrix& zib_block_covariance() const { return zib_cov_; }

private:
    void check_shape(const CMatrix& W) const;

    const JacobianSet* jac_;
    CMatrix h_pinv_;  // p x n
    CMatrix zib_cov_;
};

CMatrix estimate_states(const CMatrix& W, const JacobianSet& jac);
CMatrix conventional_residual(const CMatrix& W, const JacobianSet& jac);
CMatrix enhanced_residual(const CMatrix& W_bar, const JacobianSet& jac);

struct BddConfig {
    /// Standard deviation of the complex measurement noise (total variance
    /// noise_sigma^2 per channel). Zero selects noiseless mode.
    double noise_sigma = 0.0;
    /// False-alarm rate for the chi-square test.
    double alpha = 0.05;
    /// Threshold on the squared row residual in noiseless mode.
    double noiseless_tolerance = 1e-8;
};

struct BddReport {
    std::vector<double> statistic;  // one per time row
    double threshold = 0.0;
    std::vector<int> flagged_rows;  // 1-based time indices
    bool flagged = false;
    int degrees_of_freedom = 0;     // real degrees of freedom, 0 in noiseless mode
};

/// Per-row chi-square test on the conventional residual.
BddReport conventional_bdd(const CMatrix& W, const JacobianSet& jac, const BddConfig& config);

/// Per-row chi-square test on the ZIB-augmented residual.
BddReport enhanced_bdd(const CMatrix& W_bar, const JacobianSet& jac, const BddConfig& config);

/// CSV rows of (t, statistic, flagged).
void write_bdd_csv(std::ostream& out, const BddReport& report);
void write_bdd_csv(const std::filesystem::path& path, const BddReport& report);

} // namespace fdilab
