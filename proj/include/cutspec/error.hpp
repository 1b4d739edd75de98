#pragma once

#include <stdexcept>
#include <string>

namespace cutspec {

enum class ErrorCode {
  InvalidArgument,
  InvalidDomain,
  NonConvergence,
  NoSignChange,
  GraphConditionViolated,
  AssumptionViolated,
  DegenerateElement,
  DimensionMismatch,
  SingularMatrix,
  FactorizationFailed,
  NotConverged,
  LengthMismatch,
  UnknownProblem,
  IoError,
  ConfigError,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable code; the C API maps codes to
/// status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace cutspec
