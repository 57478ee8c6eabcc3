#ifndef REP_CORE_HPP
#define REP_CORE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rep/errors.hpp"

namespace rep {

// Physical parameters of the spectral system. omega = sqrt(k*c_b/n) is the
// oscillation frequency of the transformed linear equation.
struct REPParams {
  int n = 0;
  double k = 0.0;
  double c_b = 0.0;
  double omega = 0.0;

  static REPParams make(int n, double k, double c_b);
};

// Initial data: density rho0 and the eigenvalue vector lambda0 sorted
// ascending. J counts the entries exactly equal to the minimum; the case
// structure of the dynamics is discontinuous in J, so equality is exact
// (callers wanting "nearly equal" must pre-snap values).
struct SpectralInitialData {
  double rho0 = 0.0;
  std::vector<double> lambda0;
  int J = 0;

  static SpectralInitialData make(double rho0, std::vector<double> lambda0);

  double lambda_min() const { return lambda0.front(); }
  double lambda_max() const { return lambda0.back(); }
  double spread() const { return lambda0.back() - lambda0.front(); }
  bool all_equal() const { return J == static_cast<int>(lambda0.size()); }
};

enum class Verdict { GlobalBounded, BlowupPossible, Degenerate };

enum class CaseLabel { I, IIa, IIb, IIc, III };

// Rule that produced a verdict. The unresolved tag marks n=4, J=2 data with
// A0 < k*rho0, where neither blow-up nor global existence is known.
enum class RuleTag {
  JAboveHalf,
  JEqualsHalfAtLeastThree,
  AllEqualDegenerate,
  CaseI,
  CaseIIa,
  CaseIIb,
  CaseIIc,
  CaseIII,
  UnresolvedByTheory,
};

struct Classification {
  Verdict verdict = Verdict::GlobalBounded;
  RuleTag reason = RuleTag::JAboveHalf;
  std::optional<CaseLabel> caseLabel;
  std::optional<double> A0;
};

const char* verdict_name(Verdict v) noexcept;
const char* case_label_name(CaseLabel c) noexcept;
const char* rule_tag_name(RuleTag t) noexcept;

// Multiplicity of the minimum of a sorted vector, by exact equality.
int compute_J(std::span<const double> sorted_lambda0);

// Validates raw inputs: positivity of k, c_b, rho0, finiteness, dimension
// match; sorts lambda0 and recomputes J. Throws rep::Error.
std::pair<REPParams, SpectralInitialData> validate(int n, double k, double c_b, double rho0,
                                                   std::vector<double> lambda0);

// Initial-data classification per the global-existence and blow-up-case
// rules. Pure function of (params, init).
Classification classify(const REPParams& params, const SpectralInitialData& init);

// A0 = (lambda_{1,0}-lambda_{3,0})(lambda_{1,0}-lambda_{4,0}), defined for n=4.
double initial_gap_product(const SpectralInitialData& init);

}  // namespace rep

#endif
