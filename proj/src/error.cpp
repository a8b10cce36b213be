#include "vofc/error.hpp"

namespace vofc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInterval: return "InvalidInterval";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::BoundaryViolation: return "BoundaryViolation";
    case ErrorKind::InfeasibleStart: return "InfeasibleStart";
    case ErrorKind::DegenerateMultipliers: return "DegenerateMultipliers";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::ArityError: return "ArityError";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EndpointUndefined: return "EndpointUndefined";
    case ErrorKind::InnerGridTooCoarse: return "InnerGridTooCoarse";
    case ErrorKind::SingularConstraint: return "SingularConstraint";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::EvaluationError: return "EvaluationError";
    case ErrorKind::ConstraintViolated: return "ConstraintViolated";
    case ErrorKind::NoConvergence: return "NoConvergence";
  }
  return "UnknownError";
}

}  // namespace vofc
