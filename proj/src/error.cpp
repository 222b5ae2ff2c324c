#include "mmtail/error.hpp"

#include <sstream>

namespace mmtail {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidTiming: return "InvalidTiming";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotMetzler: return "NotMetzler";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NonRealDominant: return "NonRealDominant";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::NonPositiveXi: return "NonPositiveXi";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ShapeCapExceeded: return "ShapeCapExceeded";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateSpread: return "DegenerateSpread";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

namespace {

std::string no_solution_message(double g, double target, double alpha_max) {
  std::ostringstream os;
  os.precision(12);
  os << "no root of r_D(A(-alpha)) = " << target << " in (0, " << alpha_max
     << "]: g(alpha_max) = " << g;
  return os.str();
}

}  // namespace

NoSolutionError::NoSolutionError(double g_at_cap, double target,
                                 double alpha_max)
    : Error(ErrorCode::NoSolution,
            no_solution_message(g_at_cap, target, alpha_max)),
      g_at_cap_(g_at_cap),
      target_(target),
      alpha_max_(alpha_max) {}

}  // namespace mmtail
