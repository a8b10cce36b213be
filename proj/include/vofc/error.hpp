#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vofc {

enum class ErrorKind {
  // validation
  InvalidInterval,
  InvalidOrder,
  InvalidConfig,
  InvalidProblem,
  BoundaryViolation,
  InfeasibleStart,
  DegenerateMultipliers,
  SyntaxError,
  UnknownIdentifier,
  ArityError,
  UnboundVariable,
  // numerics
  NonFiniteValue,
  EndpointUndefined,
  InnerGridTooCoarse,
  SingularConstraint,
  RootNotBracketed,
  EmptyGrid,
  EvaluationError,
  // problem-level outcomes
  ConstraintViolated,
  NoConvergence,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace vofc
