#include "cutspec/error.hpp"

namespace cutspec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::GraphConditionViolated: return "GraphConditionViolated";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::DegenerateElement: return "DegenerateElement";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::FactorizationFailed: return "FactorizationFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownProblem: return "UnknownProblem";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace cutspec
