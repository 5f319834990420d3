#include <benchmark/benchmark.h>

#include "poolplan/optimizer.hpp"
#include "poolplan/screening.hpp"
#include "poolplan/validation.hpp"

using namespace poolplan;

static void BM_expected_tests(benchmark::State& state) {
  const Prevalence p(0.05);
  double sink = 0.0;
  for (auto _ : state) {
    for (int k = 1; k <= 25; ++k)
      sink += detail::expected_tests_raw(p.value(), k, 0.95, 1.0);
  }
  benchmark::DoNotOptimize(sink);
}
BENCHMARK(BM_expected_tests);

static void BM_hwang_curve(benchmark::State& state) {
  const Prevalence p(0.05);
  double sink = 0.0;
  for (auto _ : state) {
    for (int k = 1; k <= 25; ++k)
      sink += hwang_sensitivity(p, GroupSize(k), 0.075);
  }
  benchmark::DoNotOptimize(sink);
}
BENCHMARK(BM_hwang_curve);

static void BM_optimize_constrained(benchmark::State& state) {
  const Prevalence p(0.05);
  const MisclassModel model{FamilySpec::hwang(0.075)};
  const Constraints bound{0.95, 0.0};
  const int k_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_constrained(p, model, GroupSize(k_max), bound));
  }
}
BENCHMARK(BM_optimize_constrained)->Arg(25)->Arg(200);

static void BM_misspec_grid(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        misspec_grid({0.01, 0.05, 0.1}, {0.0, 0.01, 0.05, 0.1, 0.3}, 0.075, GroupSize(25), 0.95));
  }
}
BENCHMARK(BM_misspec_grid);

static void BM_validation_replicates(benchmark::State& state) {
  ValidationConfig cfg{Prevalence(0.05), MisclassModel{FamilySpec::linear()}};
  cfg.replicates = static_cast<int>(state.range(0));
  cfg.threads = 1;
  const int n = 10000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_phi(cfg, n));
  }
  state.SetItemsProcessed(state.iterations() * cfg.replicates);
}
BENCHMARK(BM_validation_replicates)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_screen_100k(benchmark::State& state) {
  const MisclassModel model{FamilySpec::hwang(0.075)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_screen(100000, Prevalence(0.05), GroupSize(5), model, 42, 1));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_screen_100k)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
