#include <benchmark/benchmark.h>

#include "ratelab/rate_engine.hpp"
#include "ratelab/schedule.hpp"
#include "ratelab/sde_sim.hpp"
#include "ratelab/volume_models.hpp"

using namespace ratelab;

static void BM_Phi(benchmark::State& state) {
  const RateFunction rate(VolumeGrowthModel::power(1.0, 3.0));
  double R = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate.phi(R));
    R = R < 1e6 ? R * 1.37 : 10.0;
  }
}
BENCHMARK(BM_Phi);

static void BM_Psi(benchmark::State& state) {
  const RateFunction rate(VolumeGrowthModel::power(1.0, 3.0));
  double t = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate.psi(t));
    t = t < 1e8 ? t * 1.91 : 1.0;
  }
}
BENCHMARK(BM_Psi);

static void BM_PsiConstruction(benchmark::State& state) {
  for (auto _ : state) {
    const RateFunction rate(VolumeGrowthModel::from_manifold(ModelManifold::hyperbolic(2, 1.0)));
    benchmark::DoNotOptimize(rate.psi(100.0));
  }
}
BENCHMARK(BM_PsiConstruction)->Unit(benchmark::kMillisecond);

static void BM_Schedule(benchmark::State& state) {
  const auto model = VolumeGrowthModel::exp_power(1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_schedule(model, 3, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Schedule)->Arg(10)->Arg(30);

static void BM_PathStep(benchmark::State& state) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 10.0;
  cfg.r0 = 1.0;
  cfg.paths = 1;
  const auto manifold = ModelManifold::hyperbolic(2, 1.0);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_radial_path(manifold, cfg, i++));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_PathStep)->Unit(benchmark::kMillisecond);

static void BM_Ensemble(benchmark::State& state) {
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.horizon = 10.0;
  cfg.r0 = 1.0;
  cfg.paths = 1000;
  const auto manifold = ModelManifold::euclidean(2);
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(manifold, cfg, static_cast<unsigned>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * cfg.paths);
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
