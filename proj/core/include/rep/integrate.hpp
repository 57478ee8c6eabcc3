#ifndef REP_INTEGRATE_HPP
#define REP_INTEGRATE_HPP

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rep/errors.hpp"

namespace rep::ode {

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-4;
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  double lambda_escape = 1e8;
  double u_zero_eps = 1e-12;
};

// Right-hand side over flat state vectors; returns false when the state is
// outside the admissible region (the step is rejected and retried smaller).
using RhsFn = std::function<bool(double t, std::span<const double> y, std::span<double> dy)>;

enum class TerminalKind {
  ReachedTmax,
  BlowupEvent,
  StepSizeUnderflow,
  DensityOverflow,
  NonFiniteState,
};

// Signed gate evaluated on accepted steps; integration stops when the gate
// crosses from positive to <= 0 and the crossing is refined on the dense
// output.
struct Event {
  std::string name;
  std::function<double(double t, std::span<const double> y)> gate;
  TerminalKind kind = TerminalKind::BlowupEvent;
  bool tangential = false;  // marks terminals that end short of the true t_B
};

struct Terminal {
  TerminalKind kind = TerminalKind::ReachedTmax;
  double t = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::string event;
  bool tangential = false;

  double bracket_width() const { return bracket_hi - bracket_lo; }
};

struct Diagnostics {
  long n_steps = 0;
  long n_rejected = 0;
  long n_rhs = 0;
  double abel_max = 0.0;
};

// Dense-output coefficients of one accepted step, evaluated as
// y(t0 + th*h) = c0 + th*(c1 + (1-th)*(c2 + th*(c3 + (1-th)*c4))).
struct DenseStep {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<double> c0, c1, c2, c3, c4;

  std::size_t dim() const { return c0.size(); }
  void eval(double t, std::span<double> out) const;
  double eval_component(double t, std::size_t i) const;
};

enum class Coord { Lambda, U, Matrix, Generic };

struct Trajectory {
  Coord coord = Coord::Generic;
  std::vector<double> times;                 // accepted step endpoints, t0 first
  std::vector<std::vector<double>> states;   // matching states
  std::vector<DenseStep> steps;              // steps[i] covers [times[i], times[i+1]]
  Terminal terminal;
  Diagnostics diag;

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  bool contains(double t) const { return t >= t_begin() && t <= t_end(); }
  std::vector<double> eval(double t) const;
  double eval_component(double t, std::size_t i) const;
  const std::vector<double>& back_state() const { return states.back(); }
};

struct IntegrateOptions {
  StepControl control;
  double t_max = 0.0;
  std::vector<Event> events;
  // Optional per-state limit on the next step size (e.g. near a root).
  std::function<double(double t, std::span<const double> y)> step_cap;
  // Optional conserved-quantity diagnostic folded into diag.abel_max.
  std::function<double(std::span<const double> y)> conservation;
  Coord coord = Coord::Generic;
};

// Embedded Dormand-Prince 5(4) with PI step-size control, componentwise
// error test err_i <= atol + rtol*max(|y0_i|,|y1_i|), fourth-order dense
// output and event refinement by bisection to width 1e-12*max(1,|t|).
Trajectory integrate(const RhsFn& rhs, double t0, std::span<const double> y0,
                     const IntegrateOptions& opts);

// Refine the gate crossing inside one dense step by bisection.
// Pre: gate(t0) > 0 >= gate(t1) (values over the step). Throws NoCrossing.
std::pair<double, double> detect_gate_crossing(
    const DenseStep& step, const std::function<double(double, std::span<const double>)>& gate);

// Zero/threshold crossing of component `comp` (value - threshold gate),
// the u_1 blow-up detector. Throws NoCrossing when no sign change.
std::pair<double, double> detect_component_crossing(const DenseStep& step, std::size_t comp,
                                                    double threshold);

// Classical fixed-step RK4 with cubic-Hermite dense output; independent
// reference path for oracle comparisons. With sample_stride > 1 only every
// stride-th point (plus the final one) is recorded and no dense steps are
// kept, so long fine-step runs stay memory-lean.
Trajectory reference_integrate(const RhsFn& rhs, double t0, std::span<const double> y0,
                               double h_fixed, double t_max, Coord coord = Coord::Generic,
                               long sample_stride = 1);

}  // namespace rep::ode

#endif
