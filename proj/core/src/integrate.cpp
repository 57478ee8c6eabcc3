#include "rep/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace rep::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// b (5th order) equals the a7 row; error weights are b5 - b4.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights for the fifth contribution.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kFacMin = 0.2;   // max shrink per step
constexpr double kFacMax = 10.0;  // max growth per step

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void DenseStep::eval(double t, std::span<double> out) const {
  const double h = t1 - t0;
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  for (std::size_t i = 0; i < c0.size(); ++i)
    out[i] = c0[i] + th * (c1[i] + th1 * (c2[i] + th * (c3[i] + th1 * c4[i])));
}

double DenseStep::eval_component(double t, std::size_t i) const {
  const double h = t1 - t0;
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  return c0[i] + th * (c1[i] + th1 * (c2[i] + th * (c3[i] + th1 * c4[i])));
}

std::vector<double> Trajectory::eval(double t) const {
  std::vector<double> out(states.front().size());
  if (steps.empty() || t <= times.front()) {
    out = states.front();
    return out;
  }
  if (t >= times.back()) {
    out = states.back();
    return out;
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t idx = std::min(steps.size() - 1, static_cast<std::size_t>(it - times.begin()) - 1);
  steps[idx].eval(t, out);
  return out;
}

double Trajectory::eval_component(double t, std::size_t i) const {
  if (steps.empty() || t <= times.front()) return states.front()[i];
  if (t >= times.back()) return states.back()[i];
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t idx = std::min(steps.size() - 1, static_cast<std::size_t>(it - times.begin()) - 1);
  return steps[idx].eval_component(t, i);
}

std::pair<double, double> detect_gate_crossing(
    const DenseStep& step, const std::function<double(double, std::span<const double>)>& gate) {
  std::vector<double> y(step.dim());
  auto value = [&](double t) {
    step.eval(t, y);
    return gate(t, y);
  };
  double lo = step.t0, hi = step.t1;
  double glo = value(lo), ghi = value(hi);
  if (glo <= 0.0) return {lo, lo};  // crossed already at step start
  if (ghi > 0.0) throw Error(ErrorCode::NoCrossing, "gate does not cross inside the step");
  const double width_tol = 1e-12 * std::max(1.0, std::abs(hi));
  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // step width at rounding limit
    const double gm = value(mid);
    if (gm > 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  return {lo, hi};
}

std::pair<double, double> detect_component_crossing(const DenseStep& step, std::size_t comp,
                                                    double threshold) {
  return detect_gate_crossing(step, [comp, threshold](double, std::span<const double> y) {
    return y[comp] - threshold;
  });
}

Trajectory integrate(const RhsFn& rhs, double t0, std::span<const double> y0,
                     const IntegrateOptions& opts) {
  const std::size_t dim = y0.size();
  const StepControl& ctl = opts.control;
  Trajectory traj;
  traj.coord = opts.coord;

  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  std::vector<double> ytmp(dim), ynew(dim);

  traj.times.push_back(t0);
  traj.states.push_back(y);

  auto fail = [&](TerminalKind kind, double t) {
    traj.terminal.kind = kind;
    traj.terminal.t = t;
    traj.terminal.bracket_lo = traj.terminal.bracket_hi = t;
    return traj;
  };

  double t = t0;
  if (!rhs(t, y, k1)) return fail(TerminalKind::NonFiniteState, t);
  ++traj.diag.n_rhs;
  if (opts.conservation) traj.diag.abel_max = std::abs(opts.conservation(y));

  double h = std::min({ctl.h_init, ctl.h_max, opts.t_max - t0});
  double facold = 1e-4;
  bool last_rejected = false;

  while (t < opts.t_max) {
    // a remainder at rounding scale counts as arrival, not as underflow
    const double remaining = opts.t_max - t;
    if (remaining <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(opts.t_max)))
      break;
    h = std::min(h, remaining);
    if (opts.step_cap) h = std::min(h, std::max(opts.step_cap(t, y), ctl.h_min));
    if (h < ctl.h_min) {
      traj.terminal = Terminal{TerminalKind::StepSizeUnderflow, t, t, t, "", false};
      return traj;
    }

    bool stage_ok = true;
    auto stage = [&](std::vector<double>& kout, double frac, auto&&... terms) {
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        ((acc += terms.first * terms.second[i]), ...);
        ytmp[i] = y[i] + h * acc;
      }
      stage_ok = rhs(t + frac * h, ytmp, kout);
      ++traj.diag.n_rhs;
      return stage_ok && all_finite(kout);
    };
    using P = std::pair<double, const std::vector<double>&>;

    const bool stages_ok =
        stage(k2, c2, P{a21, k1}) && stage(k3, c3, P{a31, k1}, P{a32, k2}) &&
        stage(k4, c4, P{a41, k1}, P{a42, k2}, P{a43, k3}) &&
        stage(k5, c5, P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4}) &&
        stage(k6, 1.0, P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5}) && [&] {
          for (std::size_t i = 0; i < dim; ++i)
            ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                  a76 * k6[i]);
          const bool ok = rhs(t + h, ynew, k7);
          ++traj.diag.n_rhs;
          return ok && all_finite(k7) && all_finite(ynew);
        }();

    if (!stages_ok) {
      h *= 0.5;
      ++traj.diag.n_rejected;
      last_rejected = true;
      continue;
    }

    // Componentwise local error test.
    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double est = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
      const double sc = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(est) / sc);
    }

    const double fac11 = std::pow(std::max(err, 1e-300), kExpo1);
    if (err > 1.0) {
      h /= std::min(1.0 / kFacMin, fac11 / kSafe);
      ++traj.diag.n_rejected;
      last_rejected = true;
      continue;
    }

    // Accepted: build dense output.
    DenseStep step;
    step.t0 = t;
    step.t1 = t + h;
    step.c0 = y;
    step.c1.resize(dim);
    step.c2.resize(dim);
    step.c3.resize(dim);
    step.c4.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const double dy = ynew[i] - y[i];
      const double bspl = h * k1[i] - dy;
      step.c1[i] = dy;
      step.c2[i] = bspl;
      step.c3[i] = dy - h * k7[i] - bspl;
      step.c4[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                        d7 * k7[i]);
    }

    const double t_new = t + h;
    traj.steps.push_back(std::move(step));
    traj.times.push_back(t_new);
    traj.states.push_back(ynew);
    ++traj.diag.n_steps;

    if (opts.conservation)
      traj.diag.abel_max = std::max(traj.diag.abel_max, std::abs(opts.conservation(ynew)));

    // Event gates, checked on every accepted step.
    const Event* fired = nullptr;
    std::pair<double, double> bracket{0.0, 0.0};
    for (const Event& ev : opts.events) {
      if (ev.gate(t_new, ynew) <= 0.0) {
        auto br = detect_gate_crossing(traj.steps.back(), ev.gate);
        if (!fired || br.first < bracket.first) {
          fired = &ev;
          bracket = br;
        }
      }
    }
    if (fired) {
      traj.terminal.kind = fired->kind;
      traj.terminal.t = 0.5 * (bracket.first + bracket.second);
      traj.terminal.bracket_lo = bracket.first;
      traj.terminal.bracket_hi = bracket.second;
      traj.terminal.event = fired->name;
      traj.terminal.tangential = fired->tangential;
      return traj;
    }

    // PI controller for the next step size.
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafe));
    double h_new = h / fac;
    if (last_rejected) h_new = std::min(h_new, h);
    facold = std::max(err, 1e-4);
    last_rejected = false;

    t = t_new;
    y = ynew;
    std::swap(k1, k7);  // FSAL
    h = std::min(h_new, ctl.h_max);
  }

  traj.terminal.kind = TerminalKind::ReachedTmax;
  traj.terminal.t = t;
  traj.terminal.bracket_lo = traj.terminal.bracket_hi = t;
  return traj;
}

Trajectory reference_integrate(const RhsFn& rhs, double t0, std::span<const double> y0,
                               double h_fixed, double t_max, Coord coord, long sample_stride) {
  if (!(h_fixed > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "h_fixed must be > 0");
  if (sample_stride < 1) throw Error(ErrorCode::NonPositiveParameter, "stride must be >= 1");
  const bool dense = sample_stride == 1;
  const std::size_t dim = y0.size();
  Trajectory traj;
  traj.coord = coord;
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), ytmp(dim), ynew(dim), k_end(dim);

  traj.times.push_back(t0);
  traj.states.push_back(y);

  double t = t0;
  const long n_steps = static_cast<long>(std::ceil((t_max - t0) / h_fixed - 1e-12));
  for (long s = 0; s < n_steps; ++s) {
    const double h = std::min(h_fixed, t_max - t);
    auto eval = [&](double frac, const std::vector<double>& kin, double coeff,
                    std::vector<double>& kout) {
      for (std::size_t i = 0; i < dim; ++i) ytmp[i] = y[i] + h * coeff * kin[i];
      const bool ok = rhs(t + frac * h, ytmp, kout);
      ++traj.diag.n_rhs;
      return ok && all_finite(kout);
    };
    bool ok = rhs(t, y, k1);
    ++traj.diag.n_rhs;
    ok = ok && all_finite(k1) && eval(0.5, k1, 0.5, k2) && eval(0.5, k2, 0.5, k3) &&
         eval(1.0, k3, 1.0, k4);
    if (!ok) {
      traj.terminal = Terminal{TerminalKind::NonFiniteState, t, t, t, "", false};
      return traj;
    }
    for (std::size_t i = 0; i < dim; ++i)
      ynew[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(ynew)) {
      traj.terminal = Terminal{TerminalKind::NonFiniteState, t, t, t, "", false};
      return traj;
    }

    // Cubic Hermite dense output in the same coefficient layout.
    if (dense) {
      if (!rhs(t + h, ynew, k_end)) {
        traj.terminal = Terminal{TerminalKind::NonFiniteState, t, t, t, "", false};
        return traj;
      }
      ++traj.diag.n_rhs;
      DenseStep step;
      step.t0 = t;
      step.t1 = t + h;
      step.c0 = y;
      step.c1.resize(dim);
      step.c2.resize(dim);
      step.c3.resize(dim);
      step.c4.assign(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        const double dy = ynew[i] - y[i];
        step.c1[i] = dy;
        step.c2[i] = h * k1[i] - dy;
        step.c3[i] = dy - h * k_end[i] - step.c2[i];
      }
      traj.steps.push_back(std::move(step));
    }

    t += h;
    y = ynew;
    ++traj.diag.n_steps;
    if (dense || s % sample_stride == sample_stride - 1 || s + 1 == n_steps) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
  }
  traj.terminal.kind = TerminalKind::ReachedTmax;
  traj.terminal.t = t;
  traj.terminal.bracket_lo = traj.terminal.bracket_hi = t;
  return traj;
}

}  // namespace rep::ode
