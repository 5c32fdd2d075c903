#include <benchmark/benchmark.h>

#include <filesystem>

#include "fdilab/attack.hpp"
#include "fdilab/estimation.hpp"
#include "fdilab/lrd_detector.hpp"
#include "fdilab/rng.hpp"
#include "fdilab/synth_data.hpp"

using namespace fdilab;

namespace {

struct Rts24 {
    GridCase grid = load_case(std::filesystem::path(FDILAB_DATA_DIR) / "rts24.grid");
    JacobianSet jac = build_jacobian(grid);
};

const Rts24& rts24() {
    static const Rts24 c;
    return c;
}

CMatrix measurements(int N, std::uint64_t seed) {
    TrajectoryConfig cfg;
    cfg.N = N;
    cfg.seed = seed;
    return measure(generate_state_trajectory(rts24().grid, rts24().jac, cfg), rts24().jac, 0.0, 0);
}

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols) {
    SplitMix64 rng(1);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double re = rng.normal();
        m.data()[i] = Complex{re, rng.normal()};
    }
    return m;
}

} // namespace

static void BM_Svt(benchmark::State& state) {
    const CMatrix M = random_matrix(state.range(0), 31);
    for (auto _ : state) benchmark::DoNotOptimize(svt(M, 1.0));
}
BENCHMARK(BM_Svt)->Arg(150)->Arg(600)->Unit(benchmark::kMicrosecond);

static void BM_GroupSoftThreshold(benchmark::State& state) {
    const CMatrix M = random_matrix(state.range(0), 24);
    for (auto _ : state) benchmark::DoNotOptimize(group_soft_threshold(M, 1.0));
}
BENCHMARK(BM_GroupSoftThreshold)->Arg(150)->Arg(600)->Unit(benchmark::kMicrosecond);

static void BM_EstimateStates(benchmark::State& state) {
    const CMatrix W = measurements(static_cast<int>(state.range(0)), 0);
    const StateEstimator est(rts24().jac);
    for (auto _ : state) benchmark::DoNotOptimize(est.estimate(W));
}
BENCHMARK(BM_EstimateStates)->Arg(150)->Arg(1500)->Unit(benchmark::kMicrosecond);

static void BM_EnhancedBdd(benchmark::State& state) {
    const CMatrix W = measurements(150, 0);
    BddConfig cfg;
    cfg.noise_sigma = 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(enhanced_bdd(W, rts24().jac, cfg));
}
BENCHMARK(BM_EnhancedBdd)->Unit(benchmark::kMicrosecond);

static void BM_SolveLrdClean(benchmark::State& state) {
    const CMatrix W = measurements(150, 0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_lrd(W, rts24().jac, LrdConfig{}));
}
BENCHMARK(BM_SolveLrdClean)->Unit(benchmark::kMillisecond);

static void BM_SolveLrdMultiplicative(benchmark::State& state) {
    const CMatrix W = measurements(150, 0);
    const CMatrix W_bar =
        apply_attack(W, rts24().jac, craft_multiplicative_attack(rts24().jac, 4, std::polar(1.0, 0.2)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_lrd(W_bar, rts24().jac, LrdConfig{}));
}
BENCHMARK(BM_SolveLrdMultiplicative)->Unit(benchmark::kMillisecond);

static void BM_FeasibilityExact(benchmark::State& state) {
    const auto& jac = rts24().jac;
    const auto controlled = channels_of_pmus(jac, {2, 3, 5});
    for (auto _ : state) benchmark::DoNotOptimize(feasibility_exact(jac, controlled, {1}));
}
BENCHMARK(BM_FeasibilityExact)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
