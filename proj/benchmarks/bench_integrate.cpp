#include <benchmark/benchmark.h>

#include "rep/dynamics.hpp"
#include "rep/integrate.hpp"

using namespace rep;

// Full u-space run of the explicit family up to the u1 threshold event.
static void BM_IntegrateFamilyU(benchmark::State& state) {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  USystem sys(params, init, USystem::Variant::Reduced);
  for (auto _ : state) {
    ode::IntegrateOptions opts;
    opts.t_max = 3.0;
    const double eps = opts.control.u_zero_eps;
    opts.events.push_back(ode::Event{
        "u1-zero",
        [&sys, eps](double, std::span<const double> y) { return sys.u_first(y) - eps; },
        ode::TerminalKind::BlowupEvent, false});
    opts.step_cap = [&sys](double t, std::span<const double> y) { return sys.step_cap(t, y); };
    auto traj = ode::integrate(
        [&sys](double t, std::span<const double> y, std::span<double> dy) {
          return sys.rhs(t, y, dy);
        },
        0.0, sys.initial_state(), opts);
    benchmark::DoNotOptimize(traj.terminal.t);
  }
}
BENCHMARK(BM_IntegrateFamilyU)->Unit(benchmark::kMillisecond);

// Lambda-space run to escape at the given threshold.
static void BM_IntegrateLambdaEscape(benchmark::State& state) {
  auto [params, init] = validate(2, 1.0, 1.0, 1.0, {-3.0, 0.0});
  LambdaSystem sys(params, init);
  const double escape = std::pow(10.0, static_cast<double>(state.range(0)));
  for (auto _ : state) {
    ode::IntegrateOptions opts;
    opts.t_max = 5.0;
    opts.events.push_back(ode::Event{
        "lambda-escape",
        [&sys, escape](double, std::span<const double> y) {
          return escape - sys.max_abs_mu(y);
        },
        ode::TerminalKind::BlowupEvent, true});
    auto traj = ode::integrate(
        [&sys](double t, std::span<const double> y, std::span<double> dy) {
          return sys.rhs(t, y, dy);
        },
        0.0, sys.initial_state(), opts);
    benchmark::DoNotOptimize(traj.terminal.t);
  }
}
BENCHMARK(BM_IntegrateLambdaEscape)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

// Dense-output evaluation cost.
static void BM_DenseEval(benchmark::State& state) {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  LambdaSystem sys(params, init);
  ode::IntegrateOptions opts;
  opts.t_max = 1.5;
  auto traj = ode::integrate(
      [&sys](double t, std::span<const double> y, std::span<double> dy) {
        return sys.rhs(t, y, dy);
      },
      0.0, sys.initial_state(), opts);
  double t = 0.0;
  for (auto _ : state) {
    t += 0.001;
    if (t > 1.5) t = 0.0;
    benchmark::DoNotOptimize(traj.eval(t));
  }
}
BENCHMARK(BM_DenseEval);
