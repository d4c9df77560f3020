#include "mgsched/error.hpp"

namespace mgsched {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::step_mismatch: return "step_mismatch";
    case ErrorKind::simultaneity: return "simultaneity";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::unbounded: return "unbounded";
    case ErrorKind::iteration_limit: return "iteration_limit";
    case ErrorKind::no_feasible_candidate: return "no_feasible_candidate";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace mgsched
