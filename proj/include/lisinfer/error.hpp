#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lisinfer {

enum class ErrorKind {
  NotSymmetric,
  NotPositiveDefinite,
  ActionNotLinear,
  DegenerateTensor,
  DimensionMismatch,
  ForwardSolveFailed,
  SingularSystem,
  EmptySubspace,
  MapNotFound,
  BudgetExhausted,
  NotConverged,
  TargetEvaluationFailed,
  SeriesTooShort,
  NonDecomposable,
  EmptyChain,
  RadiiNotAscending,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Callers that need to branch on the failure
/// inspect kind(); the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lisinfer
