#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ggflow/flow.hpp"
#include "ggflow/measures.hpp"
#include "ggflow/semiconcave.hpp"
#include "ggflow/weak_kam.hpp"

using namespace ggflow;

static void BM_MinNormSelection1D(benchmark::State& state) {
  const ValueFunction u = builtin_solution("pendulum", static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TorusPoint> xs;
  for (int i = 0; i < 1024; ++i) xs.push_back(TorusPoint::wrap(unit(rng)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_norm_selection(u, xs[i++ & 1023]));
  }
}
BENCHMARK(BM_MinNormSelection1D)->Arg(1024)->Arg(8192);

static void BM_MinNormSelection2D(benchmark::State& state) {
  const ValueFunction u = builtin_solution("pendulum2d", static_cast<int>(state.range(0)));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TorusPoint> xs;
  for (int i = 0; i < 1024; ++i) {
    const double a = unit(rng);
    xs.push_back(TorusPoint::wrap(a, unit(rng)));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_norm_selection(u, xs[i++ & 1023]));
  }
}
BENCHMARK(BM_MinNormSelection2D)->Arg(128)->Arg(512);

static void BM_Wolfe(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<SmallVec>> polys(256);
  for (auto& p : polys) {
    for (int k = 0; k < state.range(0); ++k) p.emplace_back(g(rng) + 0.5, g(rng));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wolfe_min_norm_point(polys[i++ & 255]));
  }
}
BENCHMARK(BM_Wolfe)->Arg(4)->Arg(8)->Arg(32);

static void BM_LaxOleinik1D(benchmark::State& state) {
  const Potential v = Potential::registered("pendulum");
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_lax_oleinik(v, 1.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_LaxOleinik1D)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_LaxOleinik2D(benchmark::State& state) {
  const Potential v = Potential::registered("pendulum2d");
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_lax_oleinik(v, 2.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_LaxOleinik2D)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Integrate(benchmark::State& state) {
  const ValueFunction u = builtin_solution("degenerate", 1024);
  FlowOptions opts;
  opts.dt = 1e-4;
  opts.horizon = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(u, TorusPoint::wrap(0.1), opts));
  }
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

static void BM_Classify(benchmark::State& state) {
  const ValueFunction u = builtin_solution("pendulum", 1024);
  const Potential v = Potential::registered("pendulum");
  const ClassifyConfig cfg = ClassifyConfig::defaults(u, v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dichotomy_classify(u, v, 1.0, TorusPoint::wrap(0.25), cfg));
  }
}
BENCHMARK(BM_Classify)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
