#ifndef REP_ANALYSIS_HPP
#define REP_ANALYSIS_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rep/core.hpp"
#include "rep/dynamics.hpp"
#include "rep/integrate.hpp"

namespace rep::analysis {

// Lower bound on the blow-up time from the scalar comparison argument:
// (1/omega) arctan(lambda_{1,0}/omega) + pi/(2 omega).
double lower_bound_tB(const REPParams& params, double lambda10);

struct RateFit {
  double exponent = 0.0;
  double coefficient = 0.0;  // limit of (tB-t)^exponent * quantity
  int windowDecades = 0;
  double residual = 0.0;  // max relative deviation over the fit window
  bool log_growth = false;
  bool ambiguous = false;

  double C() const { return std::abs(coefficient); }
};

struct PQEstimate {
  double p = 0.0;
  double q = 0.0;
  double raw_p = 0.0;  // last tail sample, before extrapolation
  double raw_q = 0.0;
  int samples = 0;
};

struct BlowupReport {
  double tB = 0.0;
  double tB_bracket_width = 0.0;
  int J = 0;
  double p = 0.0;
  double q = 0.0;
  double p_raw = 0.0;
  double q_raw = 0.0;
  double u1_slope = 0.0;  // u_1'(tB) = -alpha_1; zero for tangential terminals
  double gamma = 0.0;     // pole-order sum of lambda = -(fitted rho exponent)
  std::optional<double> R0;
  RateFit xi1;
  RateFit xin;
  RateFit rho_rate;
  CaseLabel caseObserved = CaseLabel::I;
  bool tangential = false;
  std::map<std::string, double> residuals;
};

// Expected rates per case. For first-order cases xi values are the pole
// coefficients; log-flagged directions diverge slower than any power.
struct RatePrediction {
  CaseLabel caseLabel = CaseLabel::I;
  double lambda1_exponent = 1.0;
  double xi1 = 0.0;
  double lambda_n_exponent = 1.0;
  double xin = 0.0;
  bool xin_log_flag = false;       // case I: middle directions are O(|ln|)
  bool xin_divergent_integral = false;  // case IIa: int lambda_i diverges
  double rho_exponent = 0.0;
  std::optional<double> rho_coefficient;
};

struct LadderSpec {
  double delta = 1e-2;
  int m_max = 12;
  double tau_min = 1e-6;
  double tau_max = 1e-2;
};

// Geometric tail ladder of a scalar quantity: points (tau_m, value(tB-tau_m))
// with tau_m = delta * 2^-m restricted to [t_lo, t_hi] and the tau window.
struct LadderPoint {
  double tau = 0.0;
  double value = 0.0;
};
std::vector<LadderPoint> sample_ladder(const std::function<double(double)>& quantity, double tB,
                                       double t_lo, double t_hi, const LadderSpec& spec = {});

// Polynomial extrapolation of ladder values to tau -> 0 (Neville).
double extrapolate_to_zero(const std::vector<LadderPoint>& points, int max_points = 5);

// Power-law fit of a tail quantity: picks the trial exponent whose scaled
// ladder (tB-t)^e q(t) is closest to a constant, Richardson-extrapolates the
// prefactor, and flags logarithmic growth when (tB-t) q -> 0 while |q| grows.
// Throws InsufficientTailSamples (< 4 points or < 2 decades of span) and
// AmbiguousExponent (two trials within 2x residual).
RateFit fit_rate(const std::function<double(double)>& quantity, double tB, double t_lo,
                 double t_hi, const std::vector<double>& trial_exponents,
                 const LadderSpec& spec = {});

// Trajectory-facing overload: selects a lambda group value or rho from a
// LambdaSystem trajectory.
struct QuantitySelector {
  enum class Kind { LambdaGroup, Rho } kind = Kind::LambdaGroup;
  int group = 0;
  static QuantitySelector lambda_group(int g) { return {Kind::LambdaGroup, g}; }
  static QuantitySelector rho() { return {Kind::Rho, 0}; }
};
RateFit fit_rate(const LambdaSystem& sys, const ode::Trajectory& traj, double tB,
                 const QuantitySelector& sel, const std::vector<double>& trial_exponents,
                 const LadderSpec& spec = {});

// p = -lim v_1 u_n, q = lim u_1 v_n by Richardson extrapolation over a
// geometric tail ladder inside the trajectory domain. Throws
// InsufficientTailSamples.
PQEstimate estimate_pq(const USystem& sys, const ode::Trajectory& u_traj, double tB,
                       const SpectralInitialData& init);

// Blow-up time extraction. Transversal u_1 crossings use the refined event
// bracket plus the threshold-offset correction u_zero_eps/alpha_1; tangential
// terminals extrapolate the pole of lambda_1 from the last decade of the
// lambda-space trajectory. Throws NotABlowupTrajectory.
struct BlowupTime {
  double tB = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool tangential = false;
};
BlowupTime find_blowup_time(const USystem& usys, const ode::Trajectory& u_traj,
                            const LambdaSystem* lsys, const ode::Trajectory* lambda_traj,
                            const ode::StepControl& control);

// Pole fit helper: least-squares quadratic of (-lambda1)^(-1/m) against t
// over the last decade of samples, root-extrapolated; selects m in {1,2} by
// root conditioning. Returns (tB, half-width).
std::pair<double, double> pole_fit_tB(const LambdaSystem& sys, const ode::Trajectory& traj);

// Expected rate table per classification. Throws UnresolvedCase when the
// classification does not name a blow-up case.
RatePrediction predicted_rates(const Classification& cls, const REPParams& params,
                               const SpectralInitialData& init,
                               std::optional<double> measured_R0 = std::nullopt,
                               std::optional<double> measured_tB = std::nullopt);

// Eventual monotonicity of the extreme eigenvalues near tB (no finite-time
// oscillation). Failure indicates integration trouble, not a theory gap.
struct OscillationCheck {
  bool pass = true;
  int alternations = 0;
};
OscillationCheck check_non_oscillation(const LambdaSystem& sys, const ode::Trajectory& traj);

struct AnalysisOptions {
  ode::StepControl control;
  // The lambda pass runs tighter than the u pass: the second-order-pole
  // manifold (A0 = k rho0) is a separatrix, and accumulated local error
  // turns the numerical trajectory around near |lambda| ~ 2e9 (rtol/1e-13);
  // rtol=1e-13 keeps the turnaround two decades past the 1e9 escape stop.
  static ode::StepControl default_lambda_control() {
    ode::StepControl c;
    c.rtol = 1e-13;
    c.atol = 1e-14;
    return c;
  }
  ode::StepControl lambda_control = default_lambda_control();
  double t_max = 0.0;           // 0: use 100/omega
  double u_cap = 1e12;          // u magnitude stop for the tangential regime
  double rho_cap = 1e250;
  double rate_escape = 1e9;     // lambda-pass escape; deeper than the default
                                // stop so the rate ladder spans >= 2 decades
                                // for second-order poles
  LadderSpec ladder;
  double tangential_slope_tol = 1e-6;
};

struct RunArtifacts {
  USystem usys;
  ode::Trajectory u_traj;
  LambdaSystem lsys;
  ode::Trajectory lambda_traj;
};

// Runs the u-space and lambda-space passes for one initial-data point.
RunArtifacts run_blowup_integrations(const REPParams& params, const SpectralInitialData& init,
                                     const AnalysisOptions& opts, bool lambda_pass = true);

// Full post-processing pipeline: detect blow-up, estimate tB, p/q, rates,
// R0, and the named theorem residuals. Throws NotABlowupTrajectory when no
// blow-up occurs before t_max.
BlowupReport analyze(const REPParams& params, const SpectralInitialData& init,
                     const AnalysisOptions& opts = {}, RunArtifacts* artifacts_out = nullptr);

// Residual map entries and the hard pass thresholds pinned by the theorems.
bool hard_invariants_pass(const BlowupReport& report);

// Named-residual verification against predictions; entries are data, the
// thresholds live in hard_invariants_pass and the acceptance suite.
std::map<std::string, double> verify(const LambdaSystem& sys, const ode::Trajectory& lambda_traj,
                                     const BlowupReport& report,
                                     const std::optional<RatePrediction>& prediction,
                                     const REPParams& params, const SpectralInitialData& init);

}  // namespace rep::analysis

#endif
