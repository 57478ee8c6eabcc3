#include <benchmark/benchmark.h>

#include "rep/analysis.hpp"

using namespace rep;

// Whole blow-up pipeline cost per case family.
static void BM_AnalyzeCaseI(benchmark::State& state) {
  auto [params, init] = validate(2, 1.0, 1.0, 1.0, {-3.0, 0.0});
  analysis::AnalysisOptions opts;
  opts.t_max = 10.0;
  for (auto _ : state) {
    auto report = analysis::analyze(params, init, opts);
    benchmark::DoNotOptimize(report.tB);
  }
}
BENCHMARK(BM_AnalyzeCaseI)->Unit(benchmark::kMillisecond);

static void BM_AnalyzeCaseIIc(benchmark::State& state) {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  analysis::AnalysisOptions opts;
  opts.t_max = 10.0;
  for (auto _ : state) {
    auto report = analysis::analyze(params, init, opts);
    benchmark::DoNotOptimize(report.tB);
  }
}
BENCHMARK(BM_AnalyzeCaseIIc)->Unit(benchmark::kMillisecond);

static void BM_AnalyzeCaseIII(benchmark::State& state) {
  auto [params, init] = validate(7, 1.0, 1.0, 1.0, {-3, -3, -3, 0.5, 1.0, 1.5, 2.0});
  analysis::AnalysisOptions opts;
  opts.t_max = 10.0;
  for (auto _ : state) {
    auto report = analysis::analyze(params, init, opts);
    benchmark::DoNotOptimize(report.tB);
  }
}
BENCHMARK(BM_AnalyzeCaseIII)->Unit(benchmark::kMillisecond);
