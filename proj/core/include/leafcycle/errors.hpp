// leafcycle: error taxonomy shared by all modules.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// Every failure mode a caller can act on gets its own exception type, so
// tests and the CLI can distinguish e.g. a singular gradient matrix from a
// domain exit during integration without string matching.

#pragma once

#include <stdexcept>
#include <string>

namespace leafcycle {

// Base class for all leafcycle errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// An evaluation produced NaN or infinity.
class nonfinite_error : public error {
 public:
  explicit nonfinite_error(const std::string& what) : error(what) {}
};

// A linear system's matrix is singular relative to its row scales
// (dependent gradients / non-regular point).
class singular_matrix_error : public error {
 public:
  explicit singular_matrix_error(const std::string& what) : error(what) {}
};

// Bracketed root refinement was called without a sign change.
class no_sign_change_error : public error {
 public:
  explicit no_sign_change_error(const std::string& what) : error(what) {}
};

// A point lies outside the declared domain of a system or chart.
class outside_domain_error : public error {
 public:
  explicit outside_domain_error(const std::string& what) : error(what) {}
};

// A parameter (energy level h, sample time, ...) lies outside its valid range.
class outside_range_error : public error {
 public:
  explicit outside_range_error(const std::string& what) : error(what) {}
};

// An iteration (Newton inverse, secant cycle hunt) failed to converge.
class no_convergence_error : public error {
 public:
  explicit no_convergence_error(const std::string& what) : error(what) {}
};

// The chart Jacobian is singular at the requested point.
class singular_jacobian_error : public error {
 public:
  explicit singular_jacobian_error(const std::string& what) : error(what) {}
};

// Adaptive integration drove the step size below the representable limit.
class step_underflow_error : public error {
 public:
  explicit step_underflow_error(const std::string& what) : error(what) {}
};

// The trajectory left the declared domain.  Carries the exit time.
class domain_exit_error : public error {
 public:
  domain_exit_error(const std::string& what, double t_exit)
      : error(what), t_exit(t_exit) {}
  double t_exit;
};

// The step budget of an integration was exhausted.
class time_budget_error : public error {
 public:
  explicit time_budget_error(const std::string& what) : error(what) {}
};

// No admissible section crossing occurred within the time budget.
class no_return_error : public error {
 public:
  explicit no_return_error(const std::string& what) : error(what) {}
};

// The displacement function is flat below the noise floor: fixed points are
// not isolated (e.g. the unperturbed case where every orbit is periodic).
class not_isolated_error : public error {
 public:
  explicit not_isolated_error(const std::string& what) : error(what) {}
};

// A closed-form evaluation would overflow (factorial-ratio guard).
class overflow_guard_error : public error {
 public:
  explicit overflow_guard_error(const std::string& what) : error(what) {}
};

// Leaf parameters must be strictly positive for the built-in family.
class non_positive_leaf_error : public error {
 public:
  explicit non_positive_leaf_error(const std::string& what) : error(what) {}
};

// The inversion identity is only valid on the first monotonic branch.
class outside_monotonic_branch_error : public error {
 public:
  explicit outside_monotonic_branch_error(const std::string& what)
      : error(what) {}
};

// Expression parsing failed.  Carries the byte offset of the offending token.
class syntax_error : public error {
 public:
  syntax_error(const std::string& what, std::size_t offset)
      : error(what + " (at byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

// An expression referenced a variable not present in its context.
class unknown_variable_error : public error {
 public:
  unknown_variable_error(const std::string& name, std::size_t offset)
      : error("unknown variable '" + name + "' (at byte " +
              std::to_string(offset) + ")"),
        name(name),
        offset(offset) {}
  std::string name;
  std::size_t offset;
};

}  // namespace leafcycle
