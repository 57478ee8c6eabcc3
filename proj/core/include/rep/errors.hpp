#ifndef REP_ERRORS_HPP
#define REP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rep {

enum class ErrorCode {
  NonPositiveParameter,
  DimensionMismatch,
  NonFiniteInput,
  NonPositiveDensity,
  NonPositiveU,
  DegenerateSpectrum,
  NoCrossing,
  StepSizeUnderflow,
  NonFiniteState,
  NotABlowupTrajectory,
  InsufficientTailSamples,
  AmbiguousExponent,
  UnresolvedCase,
  OutOfDomain,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace rep

#endif
