#include "lisinfer/error.hpp"

namespace lisinfer {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ActionNotLinear: return "ActionNotLinear";
    case ErrorKind::DegenerateTensor: return "DegenerateTensor";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ForwardSolveFailed: return "ForwardSolveFailed";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::EmptySubspace: return "EmptySubspace";
    case ErrorKind::MapNotFound: return "MapNotFound";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::TargetEvaluationFailed: return "TargetEvaluationFailed";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NonDecomposable: return "NonDecomposable";
    case ErrorKind::EmptyChain: return "EmptyChain";
    case ErrorKind::RadiiNotAscending: return "RadiiNotAscending";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lisinfer
