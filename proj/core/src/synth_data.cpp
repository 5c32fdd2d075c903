#include "fdilab/synth_data.hpp"

#include <cmath>
#include <queue>

#include "fdilab/linalg.hpp"
#include "fdilab/rng.hpp"

namespace fdilab {

namespace {

enum Stream : std::uint64_t { kModeDirections = 1, kModeCoefficients = 2, kNoise = 3 };

constexpr double kAngleSpread = 0.3;

} // namespace

void TrajectoryConfig::validate() const {
    if (N < 1) throw InputError("N must be at least 1");
    if (disturbance_onset < 1 || disturbance_onset > N)
        throw InputError("disturbance_onset must lie in 1..N");
    if (num_modes < 1) throw InputError("num_modes must be at least 1");
    if (!(decay_base > 1.0)) throw InputError("decay_base must exceed 1");
    if (variance_scale < 0.0) throw InputError("variance_scale must be nonnegative");
    if (noise_sigma < 0.0) throw InputError("noise_sigma must be nonnegative");
    if (!(sample_rate > 0.0)) throw InputError("sample_rate must be positive");
}

double TrajectoryConfig::mode_variance(int t) const {
    if (t < disturbance_onset) return 0.0;
    return variance_scale * kVarianceScaleToPerUnit / std::pow(decay_base, t - disturbance_onset);
}

CVector generate_base_state(const GridCase& grid) {
    const int p = grid.num_buses();
    std::vector<int> order(static_cast<std::size_t>(p), -1);
    std::queue<BusId> frontier;
    frontier.push(1);
    order[0] = 0;
    int next = 1;
    while (!frontier.empty()) {
        BusId b = frontier.front();
        frontier.pop();
        for (BusId nb : grid.neighbors(b)) {
            auto& slot = order[static_cast<std::size_t>(nb - 1)];
            if (slot < 0) {
                slot = next++;
                frontier.push(nb);
            }
        }
    }

    CVector x(p);
    for (int b = 0; b < p; ++b) {
        const double angle = p > 1 ? -kAngleSpread * order[static_cast<std::size_t>(b)] / (p - 1) : 0.0;
        x(b) = std::polar(1.0, angle);
    }

    const JacobianSet jac = build_jacobian(grid);
    if (jac.k() > 0) x -= linalg::pseudo_inverse(jac.A) * (jac.A * x);
    return x;
}

Trajectory generate_trajectory(const GridCase& grid, const JacobianSet& jac,
                               const TrajectoryConfig& config) {
    config.validate();
    const int p = jac.p();
    const int r = config.num_modes;

    Trajectory traj;
    traj.base = generate_base_state(grid);

    const CMatrix null_basis = linalg::nullspace_basis(jac.A, p);
    if (null_basis.cols() < r)
        throw InputError("num_modes exceeds the dimension of null(A) (" +
                         std::to_string(null_basis.cols()) + ")");

    SplitMix64 dir_rng(SplitMix64::derive(config.seed, kModeDirections));
    CMatrix G(null_basis.cols(), r);
    for (Eigen::Index j = 0; j < G.cols(); ++j)
        for (Eigen::Index i = 0; i < G.rows(); ++i) {
            const double re = dir_rng.normal();
            const double im = dir_rng.normal();
            G(i, j) = Complex{re, im};
        }
    Eigen::HouseholderQR<CMatrix> qr(G);
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(G.rows(), r);
    traj.modes = null_basis * Q;

    SplitMix64 coef_rng(SplitMix64::derive(config.seed, kModeCoefficients));
    traj.coefficients = Eigen::MatrixXd::Zero(config.N, r);
    for (int t = config.disturbance_onset; t <= config.N; ++t) {
        const double sd = std::sqrt(config.mode_variance(t));
        for (int i = 0; i < r; ++i) traj.coefficients(t - 1, i) = sd * coef_rng.normal();
    }

    const CMatrix offsets = traj.coefficients.cast<Complex>() * traj.modes.transpose();
    traj.X = offsets.rowwise() + traj.base.transpose();
    return traj;
}

CMatrix generate_state_trajectory(const GridCase& grid, const JacobianSet& jac,
                                  const TrajectoryConfig& config) {
    return generate_trajectory(grid, jac, config).X;
}

CMatrix measure(const CMatrix& X, const JacobianSet& jac, double noise_sigma, std::uint64_t seed) {
    if (X.cols() != jac.p()) throw InputError("state matrix column count does not match p");
    if (noise_sigma < 0.0) throw InputError("noise_sigma must be nonnegative");
    CMatrix W = X * jac.H.transpose();
    if (noise_sigma == 0.0) return W;
    SplitMix64 rng(SplitMix64::derive(seed, kNoise));
    const double sd = noise_sigma / std::sqrt(2.0);
    for (Eigen::Index t = 0; t < W.rows(); ++t)
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            const double re = rng.normal();
            const double im = rng.normal();
            W(t, j) += sd * Complex{re, im};
        }
    return W;
}

std::vector<double> singular_value_profile(const CMatrix& W) {
    const RVector s = linalg::singular_values(W);
    return {s.data(), s.data() + s.size()};
}

} // namespace fdilab
