// leafcycle: a small arithmetic expression language for run configuration.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// Grammar (byte offsets reported on errors):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)*          left-associative
//   atom    := number | name | 'sqrt' '(' sum ')' | '(' sum ')'
// '^' binds tighter than unary minus, so -x^2 parses as -(x^2). Exponents
// must fold to integer constants at parse time (x^(1+1) is fine, x^y is
// not). 'pi' is a builtin constant in every context. sqrt of a negative
// value evaluates to NaN, which downstream numeric guards reject.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "leafcycle/numkernel.hpp"

namespace leafcycle {

// The ordered variable names an expression may reference.
struct variable_context {
  std::vector<std::string> names;
  // Index of `name`, or -1 when absent.
  int index_of(const std::string& name) const;
};

// y_1..y_n, c_1..c_{n-2}, k_1..k_{n-2}: chart-coordinate expressions with
// leaf and modulus parameters.
variable_context chart_variables(int n);
// c, k: scalar leaf and modulus parameters for polynomial coefficients.
variable_context coefficient_variables();
// x_1..x_n: ambient-coordinate expressions for custom systems.
variable_context ambient_variables(int n);

namespace detail {
struct expr_node;
}

// A parsed expression bound to its variable context.
class expression {
 public:
  expression() = default;

  // Value at `values` (aligned with the context's name order; size must
  // match).
  double eval(const vecn& values) const;

  // Fully parenthesized rendering; parsing the result reproduces the same
  // tree.
  std::string to_string() const;

  const std::vector<std::string>& variables() const { return names_; }
  bool empty() const { return !root_; }

 private:
  friend expression parse_expression(const std::string&,
                                     const variable_context&);
  std::shared_ptr<const detail::expr_node> root_;
  std::vector<std::string> names_;
};

// Parses `source` against `vars`. Throws syntax_error (with the byte offset
// of the defect) and unknown_variable_error.
expression parse_expression(const std::string& source,
                            const variable_context& vars);

// Wraps an expression over ambient_variables(arity) as a scalar field with
// a finite-difference gradient.
scalar_field field_from_expression(const expression& e, int arity);

}  // namespace leafcycle
