#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgsched {

enum class ErrorKind {
  invalid_argument,
  domain,
  dimension_mismatch,
  step_mismatch,
  simultaneity,
  infeasible,
  unbounded,
  iteration_limit,
  no_feasible_candidate,
  parse,
  validation,
  io,
};

/// Machine-readable category name, used by the CLI on failure.
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mgsched
