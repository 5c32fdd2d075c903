#pragma once

#include <cstdint>
#include <vector>

#include "fdilab/grid_model.hpp"
#include "fdilab/types.hpp"

namespace fdilab {

/// Converts the load-disturbance variance scale (MW^2) into a per-unit state
/// perturbation variance.
inline constexpr double kVarianceScaleToPerUnit = 1e-4;

struct TrajectoryConfig {
    int N = 150;
    double sample_rate = 30.0;   // Hz
    int disturbance_onset = 31;  // 1-based instant of the first disturbance
    double variance_scale = 60.0;
    double decay_base = 1.1;
    int num_modes = 3;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;

    /// Variance of each mode coefficient at 1-based instant t.
    double mode_variance(int t) const;
};

struct Trajectory {
    CMatrix X;        // N x p states
    CVector base;     // p
    CMatrix modes;    // p x r orthonormal directions inside null(A)
    Eigen::MatrixXd coefficients;  // N x r mode coefficients m_t
};

/// Flat start (|V| = 1, angles spread over [0, -0.3] rad in breadth-first order
/// from bus 1) projected onto null(A).
CVector generate_base_state(const GridCase& grid);

Trajectory generate_trajectory(const GridCase& grid, const JacobianSet& jac,
                               const TrajectoryConfig& config);

/// States only.
CMatrix generate_state_trajectory(const GridCase& grid, const JacobianSet& jac,
                                  const TrajectoryConfig& config);

/// W = X H^T + E with circular complex Gaussian E of total variance noise_sigma^2.
CMatrix measure(const CMatrix& X, const JacobianSet& jac, double noise_sigma, std::uint64_t seed);

/// Singular values in descending order.
std::vector<double> singular_value_profile(const CMatrix& W);

} // namespace fdilab
