#include <cmath>

#include <benchmark/benchmark.h>

#include "mpfb/illposedness.hpp"
#include "mpfb/mild_solver.hpp"
#include "mpfb/semigroup.hpp"

using namespace mpfb;

namespace {

SolverConfig cube_config(int n) {
  SolverConfig c;
  c.points = {n, n, n};
  c.half_extent = Vec3::Constant(8.0);
  return c;
}

void BM_NonlinearFlux(benchmark::State& state) {
  const SolverConfig cfg = cube_config(static_cast<int>(state.range(0)));
  const SpectralField U = random_solenoidal_field(cfg.grid(), 1, 0.5, 4.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(nonlinear_flux(U, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(U.size()));
}
BENCHMARK(BM_NonlinearFlux)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LinearPropagate(benchmark::State& state) {
  const SolverConfig cfg = cube_config(static_cast<int>(state.range(0)));
  const SpectralField U = random_solenoidal_field(cfg.grid(), 2, 0.5, 4.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(linear_propagate(U, 0.1));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(U.size()));
}
BENCHMARK(BM_LinearPropagate)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SymbolAndSemigroup(benchmark::State& state) {
  const Vec3 xi(0.3, -1.2, 0.7);
  const Vec6c v = Vec6c::Ones();
  for (auto _ : state) {
    const SymbolBundle b = build_symbol(xi);
    benchmark::DoNotOptimize(semigroup_apply(b, 0.25, v));
  }
}
BENCHMARK(BM_SymbolAndSemigroup);

void BM_CubeData(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_initial_data(N, 0.05, 8));
}
BENCHMARK(BM_CubeData)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_SecondIterateSample(benchmark::State& state) {
  const IllposedDatum d = make_datum(static_cast<int>(state.range(0)), 0.05);
  const double t = std::pow(4.0, -d.N);
  SecondIterateOptions opt;
  opt.self_check = 0;
  const std::vector<Vec3> xi{Vec3(0.3, 0.3, 0.3)};
  for (auto _ : state) benchmark::DoNotOptimize(second_iterate(d, t, xi, opt));
}
BENCHMARK(BM_SecondIterateSample)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
