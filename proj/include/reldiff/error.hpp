#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reldiff {

enum class ErrorKind {
  invalid_argument,
  zero_delay,
  rank_deficient_basis,
  non_positive_basis,
  dimension_mismatch,
  approx_not_positive,
  surrogate_search_exceeded,
  class_beyond_horizon,
  mixed_scalar_mode,
  not_commensurable,
  not_comparable,
  theorem_violation,
  recursion_budget_exceeded,
  not_controllable_at_t,
  epsilon_too_large,
  schema_error,
  rational_parse_error,
  ambiguous_boundary,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace reldiff
