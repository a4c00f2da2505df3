#include <benchmark/benchmark.h>

#include "kvwave/charroots.hpp"
#include "kvwave/evolve.hpp"
#include "kvwave/spectrum.hpp"

using namespace kvwave;

static void BM_Assemble(benchmark::State& state) {
  const ProblemConfig cfg = make_main_local();
  for (auto _ : state) benchmark::DoNotOptimize(assemble(cfg, static_cast<int>(state.range(0))));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assemble)->RangeMultiplier(4)->Range(100, 6400)->Complexity();

static void BM_TrapezoidalStep(benchmark::State& state) {
  const SemiDiscreteSystem sys = assemble(make_main_local(), static_cast<int>(state.range(0)));
  const TrapezoidalStepper stepper(sys, 1e-3);
  State U = smooth_initial_state(sys);
  for (auto _ : state) {
    U = stepper.step(U);
    benchmark::DoNotOptimize(U.data().data());
  }
}
BENCHMARK(BM_TrapezoidalStep)->Arg(100)->Arg(400)->Arg(1600);

static void BM_ResolventNorm(benchmark::State& state) {
  const SemiDiscreteSystem sys = assemble(make_global(), static_cast<int>(state.range(0)));
  const auto method = state.range(1) ? ResolventMethod::lanczos : ResolventMethod::dense;
  const ResolventEvaluator eval(sys, method);
  for (auto _ : state) benchmark::DoNotOptimize(eval(25.0).norm);
}
BENCHMARK(BM_ResolventNorm)
    ->Args({100, 0})
    ->Args({200, 0})
    ->Args({200, 1})
    ->Args({600, 1})
    ->Args({2400, 1})
    ->Unit(benchmark::kMillisecond);

static void BM_CharDet(benchmark::State& state) {
  const Complex lambda(-0.05, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(char_det(lambda, 2.0));
}
BENCHMARK(BM_CharDet)->Arg(50)->Arg(500)->Arg(5000);

static void BM_RefineRoot(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(find_branch_root(Branch::branch1, n, 2.0));
}
BENCHMARK(BM_RefineRoot)->Arg(10)->Arg(60)->Arg(500);

static void BM_CountRoots(benchmark::State& state) {
  const F0Roots mu = f0_roots(30, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(count_roots_in_ball(mu.mu1, ball_radius(Branch::branch1, 30, 2.0), 2.0));
}
BENCHMARK(BM_CountRoots);
BENCHMARK_MAIN();
