#include "rep/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rep {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::NonPositiveU: return "NonPositiveU";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NotABlowupTrajectory: return "NotABlowupTrajectory";
    case ErrorCode::InsufficientTailSamples: return "InsufficientTailSamples";
    case ErrorCode::AmbiguousExponent: return "AmbiguousExponent";
    case ErrorCode::UnresolvedCase: return "UnresolvedCase";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
  }
  return "Unknown";
}

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::GlobalBounded: return "GlobalBounded";
    case Verdict::BlowupPossible: return "BlowupPossible";
    case Verdict::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

const char* case_label_name(CaseLabel c) noexcept {
  switch (c) {
    case CaseLabel::I: return "I";
    case CaseLabel::IIa: return "IIa";
    case CaseLabel::IIb: return "IIb";
    case CaseLabel::IIc: return "IIc";
    case CaseLabel::III: return "III";
  }
  return "Unknown";
}

const char* rule_tag_name(RuleTag t) noexcept {
  switch (t) {
    case RuleTag::JAboveHalf: return "J-above-half";
    case RuleTag::JEqualsHalfAtLeastThree: return "J-equals-half-at-least-3";
    case RuleTag::AllEqualDegenerate: return "all-equal-degenerate";
    case RuleTag::CaseI: return "case-I";
    case RuleTag::CaseIIa: return "case-IIa";
    case RuleTag::CaseIIb: return "case-IIb";
    case RuleTag::CaseIIc: return "case-IIc";
    case RuleTag::CaseIII: return "case-III";
    case RuleTag::UnresolvedByTheory: return "unresolved-by-theory";
  }
  return "Unknown";
}

REPParams REPParams::make(int n, double k, double c_b) {
  if (n < 2) throw Error(ErrorCode::NonPositiveParameter, "dimension n must be >= 2");
  if (!std::isfinite(k) || !std::isfinite(c_b))
    throw Error(ErrorCode::NonFiniteInput, "k and c_b must be finite");
  if (k <= 0.0) throw Error(ErrorCode::NonPositiveParameter, "force constant k must be > 0");
  if (c_b <= 0.0) throw Error(ErrorCode::NonPositiveParameter, "background c_b must be > 0");
  REPParams p;
  p.n = n;
  p.k = k;
  p.c_b = c_b;
  p.omega = std::sqrt(k * c_b / n);
  return p;
}

SpectralInitialData SpectralInitialData::make(double rho0, std::vector<double> lambda0) {
  if (!std::isfinite(rho0)) throw Error(ErrorCode::NonFiniteInput, "rho0 must be finite");
  if (rho0 <= 0.0) throw Error(ErrorCode::NonPositiveParameter, "rho0 must be > 0");
  if (lambda0.size() < 2)
    throw Error(ErrorCode::DimensionMismatch, "lambda0 must have at least 2 entries");
  for (double v : lambda0)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "lambda0 entries must be finite");
  std::sort(lambda0.begin(), lambda0.end());
  SpectralInitialData d;
  d.rho0 = rho0;
  d.lambda0 = std::move(lambda0);
  d.J = compute_J(d.lambda0);
  return d;
}

int compute_J(std::span<const double> sorted_lambda0) {
  if (sorted_lambda0.size() < 2)
    throw Error(ErrorCode::DimensionMismatch, "compute_J requires length >= 2");
  const double min = sorted_lambda0.front();
  int j = 0;
  for (double v : sorted_lambda0) {
    if (v == min)
      ++j;
    else
      break;
  }
  return j;
}

std::pair<REPParams, SpectralInitialData> validate(int n, double k, double c_b, double rho0,
                                                   std::vector<double> lambda0) {
  if (static_cast<int>(lambda0.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "lambda0 must have exactly n entries");
  REPParams params = REPParams::make(n, k, c_b);
  SpectralInitialData init = SpectralInitialData::make(rho0, std::move(lambda0));
  return {params, init};
}

double initial_gap_product(const SpectralInitialData& init) {
  if (init.lambda0.size() != 4)
    throw Error(ErrorCode::DimensionMismatch, "A0 is defined for n=4 only");
  const double l1 = init.lambda0[0];
  return (l1 - init.lambda0[2]) * (l1 - init.lambda0[3]);
}

namespace {

// The IIc surface A0 == k*rho0 is measure-zero; constructed data hits it only
// up to the rounding of deriving rho0 from A0/k, so equality is taken to a
// few ulps instead of bitwise.
bool nearly_equal_ulps(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= 8.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

Classification classify(const REPParams& params, const SpectralInitialData& init) {
  const int n = params.n;
  const int J = init.J;
  Classification c;

  if (init.all_equal()) {
    c.verdict = Verdict::GlobalBounded;
    c.reason = RuleTag::AllEqualDegenerate;
    return c;
  }
  if (2 * J > n) {
    c.verdict = Verdict::GlobalBounded;
    c.reason = RuleTag::JAboveHalf;
    return c;
  }
  if (J >= 3 && 2 * J == n) {
    c.verdict = Verdict::GlobalBounded;
    c.reason = RuleTag::JEqualsHalfAtLeastThree;
    return c;
  }

  c.verdict = Verdict::BlowupPossible;
  if (J == 1) {
    c.reason = RuleTag::CaseI;
    c.caseLabel = CaseLabel::I;
  } else if (J == 2 && n >= 5) {
    c.reason = RuleTag::CaseIIa;
    c.caseLabel = CaseLabel::IIa;
  } else if (J == 2 && n == 4) {
    const double A0 = initial_gap_product(init);
    c.A0 = A0;
    const double krho0 = params.k * init.rho0;
    if (nearly_equal_ulps(A0, krho0)) {
      c.reason = RuleTag::CaseIIc;
      c.caseLabel = CaseLabel::IIc;
    } else if (A0 > krho0) {
      c.reason = RuleTag::CaseIIb;
      c.caseLabel = CaseLabel::IIb;
    } else {
      // A0 < k*rho0: the theory neither proves blow-up nor excludes it.
      c.reason = RuleTag::UnresolvedByTheory;
    }
  } else {
    // J >= 3, n > 2J
    c.reason = RuleTag::CaseIII;
    c.caseLabel = CaseLabel::III;
  }
  return c;
}

}  // namespace rep
