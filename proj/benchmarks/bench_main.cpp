#include <random>

#include <benchmark/benchmark.h>

#include "ptfix/calibration.hpp"
#include "ptfix/config.hpp"
#include "ptfix/homography.hpp"
#include "ptfix/rig.hpp"
#include "ptfix/saccade.hpp"

namespace {

using namespace ptfix;

std::vector<Correspondence> make_corrs(int n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> du(0.0, 1024.0), dv(0.0, 768.0);
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    h(0, 2) = 17.0;
    h(1, 2) = -9.0;
    h(2, 0) = 1e-4;
    std::vector<Correspondence> corrs;
    for (int i = 0; i < n; ++i) {
        const PixelPoint b{du(rng), dv(rng)};
        const Eigen::Vector3d a = h * Eigen::Vector3d(b.u, b.v, 1.0);
        corrs.push_back({i, {a.x() / a.z(), a.y() / a.z()}, b});
    }
    return corrs;
}

void bm_homography_estimate(benchmark::State& state) {
    const auto corrs = make_corrs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(estimate(corrs));
}
BENCHMARK(bm_homography_estimate)->Arg(20)->Arg(60)->Arg(126);

struct PlannerFixture {
    Config cfg;
    CalibrationSet set;
    SaccadePlanner planner;
    int s;

    PlannerFixture()
        : cfg([] {
              Config c;
              c.rig = RigModel::ideal();
              return c;
          }()),
          set([this] {
              Rig rig(cfg.rig);
              return collect(rig, cfg.board, cfg.sweep, config_digest(cfg), 0).set;
          }()),
          planner(set, cfg.rig.intr),
          s(set.find_grid_sample({0.0, 0.0})) {
        planner.center_map(s); // warm the memoized map
    }
};

void bm_case_a_solve(benchmark::State& state) {
    static PlannerFixture fx;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> du(200.0, 800.0), dv(150.0, 600.0);
    for (auto _ : state) {
        const PixelPoint t{du(rng), dv(rng)};
        benchmark::DoNotOptimize(fx.planner.solve_case_a(fx.s, t));
    }
}
BENCHMARK(bm_case_a_solve);

void bm_center_map_build(benchmark::State& state) {
    static PlannerFixture fx;
    for (auto _ : state) {
        SaccadePlanner fresh(fx.set, fx.cfg.rig.intr);
        benchmark::DoNotOptimize(fresh.center_map(fx.s));
    }
}
BENCHMARK(bm_center_map_build);

void bm_render(benchmark::State& state) {
    const RigModel m = RigModel::default_imperfect();
    const TargetBoard board;
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(render(m, {3.0, -2.0}, board, std::nullopt, seed++));
}
BENCHMARK(bm_render);

} // namespace

BENCHMARK_MAIN();
