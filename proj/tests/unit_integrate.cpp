#include <doctest.h>

#include <cmath>

#include "rep/analysis.hpp"
#include "rep/dynamics.hpp"
#include "rep/integrate.hpp"
#include "rep/oracle.hpp"

using namespace rep;

namespace {

constexpr double kPi = 3.14159265358979323846;

ode::Trajectory run_lambda(const LambdaSystem& lsys, const ode::IntegrateOptions& opts) {
  return ode::integrate(
      [&lsys](double t, std::span<const double> y, std::span<double> dy) {
        return lsys.rhs(t, y, dy);
      },
      0.0, lsys.initial_state(), opts);
}

double lambda_escape_time(double escape, double rtol) {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  LambdaSystem lsys(params, init);
  ode::IntegrateOptions opts;
  opts.control.rtol = rtol;
  opts.control.atol = rtol * 1e-2;
  opts.t_max = 3.0;
  opts.coord = ode::Coord::Lambda;
  opts.events.push_back(ode::Event{
      "lambda-escape",
      [&lsys, escape](double, std::span<const double> y) { return escape - lsys.max_abs_mu(y); },
      ode::TerminalKind::BlowupEvent, true});
  const auto traj = run_lambda(lsys, opts);
  REQUIRE(traj.terminal.kind == ode::TerminalKind::BlowupEvent);
  return traj.terminal.t;
}

}  // namespace

TEST_CASE("step control defaults") {
  const ode::StepControl c;
  CHECK(c.rtol == 1e-10);
  CHECK(c.atol == 1e-12);
  CHECK(c.h_init == 1e-4);
  CHECK(c.lambda_escape == 1e8);
  CHECK(c.u_zero_eps == 1e-12);
  CHECK(c.h_min <= c.h_max);
}

TEST_CASE("fixed point stays fixed") {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  LambdaSystem lsys(params, init);
  // lambda = 0, rho = c_b is an equilibrium
  std::vector<double> y0 = lsys.initial_state();
  y0[0] = y0[1] = 0.0;
  y0[2] = params.c_b;
  ode::IntegrateOptions opts;
  opts.t_max = 10.0;
  auto traj = ode::integrate(
      [&lsys](double t, std::span<const double> y, std::span<double> dy) {
        return lsys.rhs(t, y, dy);
      },
      0.0, y0, opts);
  CHECK(traj.terminal.kind == ode::TerminalKind::ReachedTmax);
  const auto& last = traj.back_state();
  CHECK(last[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(last[2] == doctest::Approx(params.c_b).epsilon(1e-12));
}

TEST_CASE("u-space run flags the explicit-family breakdown before tB") {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  USystem usys(params, init, USystem::Variant::Reduced);
  ode::IntegrateOptions opts;
  opts.t_max = 3.0;
  opts.coord = ode::Coord::U;
  const double eps = opts.control.u_zero_eps;
  opts.events.push_back(ode::Event{
      "u1-zero",
      [&usys, eps](double, std::span<const double> y) { return usys.u_first(y) - eps; },
      ode::TerminalKind::BlowupEvent, false});
  opts.step_cap = [&usys](double t, std::span<const double> y) { return usys.step_cap(t, y); };
  auto traj = ode::integrate(
      [&usys](double t, std::span<const double> y, std::span<double> dy) {
        return usys.rhs(t, y, dy);
      },
      0.0, usys.initial_state(), opts);
  REQUIRE(traj.terminal.kind == ode::TerminalKind::BlowupEvent);
  CHECK(traj.terminal.event == "u1-zero");
  // u1 -> 0 tangentially here, so the threshold crossing happens early; the
  // pipeline-level tB refinement is exercised in the analysis suite.
  CHECK(traj.terminal.t < kPi / 2);
  CHECK(traj.terminal.t > kPi / 2 - 0.1);
  CHECK(traj.terminal.bracket_width() <= 1e-12 * std::max(1.0, traj.terminal.t) * 1.01);
  // the slope at the crossing is numerically zero: tangential
  CHECK(std::abs(usys.v_first(traj.eval(traj.terminal.t))) < 1e-6);
}

TEST_CASE("lambda-escape time sits below tB and converges to it") {
  const double t4 = lambda_escape_time(1e4, 1e-10);
  const double t6 = lambda_escape_time(1e6, 1e-10);
  const double t8 = lambda_escape_time(1e8, 1e-10);
  CHECK(t4 < t6);
  CHECK(t6 < t8);
  CHECK(t8 < kPi / 2);
  // second-order pole: escape at Lambda happens ~sqrt(1/Lambda) before tB
  CHECK(kPi / 2 - t8 == doctest::Approx(1e-4).epsilon(0.2));
  CHECK(kPi / 2 - t4 == doctest::Approx(1e-2).epsilon(0.2));
}

TEST_CASE("event refinement on a synthetic linear crossing") {
  ode::DenseStep step;
  step.t0 = 0.0;
  step.t1 = 1.0;
  step.c0 = {0.7};            // y(t) = 0.7 - t over the step
  step.c1 = {-1.0};
  step.c2 = {0.0};
  step.c3 = {0.0};
  step.c4 = {0.0};
  const auto [lo, hi] = ode::detect_component_crossing(step, 0, 0.0);
  CHECK(0.5 * (lo + hi) == doctest::Approx(0.7).epsilon(1e-11));
  CHECK(hi - lo <= 1e-12 * 1.01);

  // threshold crossing of the same step
  const auto [lo2, hi2] = ode::detect_component_crossing(step, 0, 0.2);
  CHECK(0.5 * (lo2 + hi2) == doctest::Approx(0.5).epsilon(1e-11));

  // no crossing above the range
  CHECK_THROWS_AS(ode::detect_component_crossing(step, 0, -1.0), Error);
}

TEST_CASE("no crossing for global data") {
  auto [params, init] = validate(4, 1.0, 1.0, 1.0, {-1, -1, -1, 2});
  USystem usys(params, init, USystem::Variant::Reduced);
  ode::IntegrateOptions opts;
  opts.t_max = 50.0;
  const double eps = opts.control.u_zero_eps;
  opts.events.push_back(ode::Event{
      "u1-zero",
      [&usys, eps](double, std::span<const double> y) { return usys.u_first(y) - eps; },
      ode::TerminalKind::BlowupEvent, false});
  auto traj = ode::integrate(
      [&usys](double t, std::span<const double> y, std::span<double> dy) {
        return usys.rhs(t, y, dy);
      },
      0.0, usys.initial_state(), opts);
  CHECK(traj.terminal.kind == ode::TerminalKind::ReachedTmax);
}

TEST_CASE("reference RK4 reproduces the closed form at h=1e-6") {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  LambdaSystem lsys(params, init);
  auto traj = ode::reference_integrate(
      [&lsys](double t, std::span<const double> y, std::span<double> dy) {
        return lsys.rhs(t, y, dy);
      },
      0.0, lsys.initial_state(), 1e-6, 1.5, ode::Coord::Lambda, 10000);
  REQUIRE(traj.terminal.kind == ode::TerminalKind::ReachedTmax);
  REQUIRE(traj.t_end() == doctest::Approx(1.5).epsilon(1e-9));
  const double expected = -1.0 / (std::cos(1.5) * std::cos(1.5)) - std::tan(1.5);
  const double got = traj.back_state()[0];
  CHECK(std::abs(got - expected) <= 1e-8 * std::abs(expected));
}

TEST_CASE("reference RK4 is fourth order") {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  LambdaSystem lsys(params, init);
  oracle::ExampleFamily fam(4.0, 1.0, -1.0, 1.0);
  const double exact = fam.eval(1.0).lambda1;
  auto rhs = [&lsys](double t, std::span<const double> y, std::span<double> dy) {
    return lsys.rhs(t, y, dy);
  };
  const double e1 =
      std::abs(ode::reference_integrate(rhs, 0.0, lsys.initial_state(), 2e-3, 1.0).back_state()[0] -
               exact);
  const double e2 =
      std::abs(ode::reference_integrate(rhs, 0.0, lsys.initial_state(), 1e-3, 1.0).back_state()[0] -
               exact);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.4));
}

TEST_CASE("reference RK4 holds a fixed point") {
  auto [params, init] = validate(2, 1.0, 1.0, 1.0, {0.0, 0.0});
  LambdaSystem lsys(params, init);
  std::vector<double> y0 = lsys.initial_state();
  y0[0] = 0.0;
  y0[1] = params.c_b;
  auto traj = ode::reference_integrate(
      [&lsys](double t, std::span<const double> y, std::span<double> dy) {
        return lsys.rhs(t, y, dy);
      },
      0.0, y0, 1e-3, 2.0);
  CHECK(traj.back_state()[0] == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("adaptive and reference paths agree on smooth segments") {
  auto [params, init] = validate(4, 4.0, 1.0, 1.0, {-1, -1, 1, 1});
  LambdaSystem lsys(params, init);
  auto rhs = [&lsys](double t, std::span<const double> y, std::span<double> dy) {
    return lsys.rhs(t, y, dy);
  };
  ode::IntegrateOptions opts;
  opts.t_max = 1.3;
  auto adaptive = ode::integrate(rhs, 0.0, lsys.initial_state(), opts);
  auto reference = ode::reference_integrate(rhs, 0.0, lsys.initial_state(), 1e-4, 1.3);
  const double a = adaptive.back_state()[0];
  const double r = reference.back_state()[0];
  CHECK(std::abs(a - r) <= 10.0 * (opts.control.rtol * std::abs(r) + opts.control.atol));
}

TEST_CASE("event times converge as tolerances shrink") {
  auto [params, init] = validate(2, 1.0, 1.0, 1.0, {-3.0, 0.0});
  std::vector<double> t_events;
  for (double rtol : {1e-6, 1e-8, 1e-10}) {
    USystem usys(params, init, USystem::Variant::Reduced);
    ode::IntegrateOptions opts;
    opts.control.rtol = rtol;
    opts.control.atol = rtol * 1e-2;
    opts.t_max = 5.0;
    const double eps = opts.control.u_zero_eps;
    opts.events.push_back(ode::Event{
        "u1-zero",
        [&usys, eps](double, std::span<const double> y) { return usys.u_first(y) - eps; },
        ode::TerminalKind::BlowupEvent, false});
    opts.step_cap = [&usys](double t, std::span<const double> y) {
      return usys.step_cap(t, y);
    };
    auto traj = ode::integrate(
        [&usys](double t, std::span<const double> y, std::span<double> dy) {
          return usys.rhs(t, y, dy);
        },
        0.0, usys.initial_state(), opts);
    REQUIRE(traj.terminal.kind == ode::TerminalKind::BlowupEvent);
    t_events.push_back(traj.terminal.t);
  }
  const double d1 = std::abs(t_events[1] - t_events[0]);
  const double d2 = std::abs(t_events[2] - t_events[1]);
  CHECK(d2 <= d1);
}

TEST_CASE("identical inputs give bitwise-identical trajectories") {
  auto [params, init] = validate(5, 1.0, 1.0, 1.0, {-2, -2, 0.5, 1, 3});
  LambdaSystem lsys(params, init);
  ode::IntegrateOptions opts;
  opts.t_max = 0.3;
  auto rhs = [&lsys](double t, std::span<const double> y, std::span<double> dy) {
    return lsys.rhs(t, y, dy);
  };
  const auto a = ode::integrate(rhs, 0.0, lsys.initial_state(), opts);
  const auto b = ode::integrate(rhs, 0.0, lsys.initial_state(), opts);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK(a.states[i] == b.states[i]);
    if (i > 0) CHECK(a.times[i] > a.times[i - 1]);  // strictly increasing samples
  }
}

TEST_CASE("step-size underflow is reported, not spun on") {
  // the admissible region ends at t = 0.5; the integrator must give up
  auto rhs = [](double t, std::span<const double> y, std::span<double> dy) {
    if (t > 0.5) return false;
    dy[0] = y[0];
    return true;
  };
  std::vector<double> y0{1.0};
  ode::IntegrateOptions opts;
  opts.t_max = 1.0;
  auto traj = ode::integrate(rhs, 0.0, y0, opts);
  CHECK(traj.terminal.kind == ode::TerminalKind::StepSizeUnderflow);
  CHECK(traj.terminal.t <= 0.5);
  CHECK(traj.terminal.t >= 0.5 - 1e-3);
}

TEST_CASE("local error per accepted step respects the componentwise bound") {
  // harmonic oscillator with known solution; check the actual local errors
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
    return true;
  };
  std::vector<double> y0{1.0, 0.0};
  ode::IntegrateOptions opts;
  opts.control.rtol = 1e-8;
  opts.control.atol = 1e-10;
  opts.t_max = 20.0;
  auto traj = ode::integrate(rhs, 0.0, y0, opts);
  CHECK(traj.terminal.kind == ode::TerminalKind::ReachedTmax);
  // global error stays within a modest multiple of the tolerance over 3 periods
  const double t = traj.t_end();
  CHECK(std::abs(traj.back_state()[0] - std::cos(t)) <= 1e-5);
  CHECK(traj.diag.n_rejected < traj.diag.n_steps / 4);
}
