#include <benchmark/benchmark.h>

#include <vector>

#include "rep/dynamics.hpp"

using namespace rep;

static void BM_LambdaRhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> lambda0;
  for (int i = 0; i < n; ++i) lambda0.push_back(-2.0 + 4.0 * i / (n - 1));
  auto [params, init] = validate(n, 1.0, 1.0, 1.0, lambda0);
  LambdaSystem sys(params, init);
  std::vector<double> y = sys.initial_state();
  std::vector<double> dy(sys.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.rhs(0.0, y, dy));
    benchmark::DoNotOptimize(dy.data());
  }
}
BENCHMARK(BM_LambdaRhs)->Arg(4)->Arg(8)->Arg(16);

static void BM_URhsReduced(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> lambda0;
  for (int i = 0; i < n; ++i) lambda0.push_back(-2.0 + 4.0 * i / (n - 1));
  auto [params, init] = validate(n, 1.0, 1.0, 1.0, lambda0);
  USystem sys(params, init, USystem::Variant::Reduced);
  std::vector<double> y = sys.initial_state();
  std::vector<double> dy(sys.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.rhs(0.0, y, dy));
    benchmark::DoNotOptimize(dy.data());
  }
}
BENCHMARK(BM_URhsReduced)->Arg(4)->Arg(8)->Arg(16);

static void BM_MatrixRhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto params = REPParams::make(n, 1.0, 1.0);
  Eigen::MatrixXd M = Eigen::MatrixXd::Random(n, n);
  MatrixSystem sys(params, M, 1.0);
  std::vector<double> y = sys.initial_state();
  std::vector<double> dy(sys.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.rhs(0.0, y, dy));
    benchmark::DoNotOptimize(dy.data());
  }
}
BENCHMARK(BM_MatrixRhs)->Arg(4)->Arg(8);
