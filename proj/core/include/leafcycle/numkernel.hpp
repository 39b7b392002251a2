// leafcycle: shared numerical kernel.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// Gradients (analytic or 4th-order central differences), dense LU with
// partial pivoting (determinants and solves), the generalized cross product
// of n-1 vectors in R^n, spectrally accurate periodic quadrature, adaptive
// Gauss-Legendre panels, Brent-style bracketed root refinement, and the exact
// closed form of the full-period trigonometric moments.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "leafcycle/errors.hpp"

namespace leafcycle {

// A point or vector in R^n; n >= 3 is fixed by the caller per object.
using vecn = std::vector<double>;

// An evaluable real function on R^n with an optional analytic gradient.
// When `grad` is absent, `gradient()` falls back to central differences.
struct scalar_field {
  int arity = 0;
  std::function<double(const vecn&)> eval;
  std::function<vecn(const vecn&)> grad;  // may be empty
};

// Convenience builders.
scalar_field constant_field(int arity, double value);
scalar_field coordinate_field(int arity, int index);  // x |-> x[index]

// Gradient of f at x: the analytic gradient when present, otherwise
// 4th-order central differences with per-axis step
// h_i = cbrt(machine epsilon) * max(1, |x_i|).
// Throws nonfinite_error if any evaluation is NaN/inf.
vecn gradient(const scalar_field& f, const vecn& x);

// Determinant of the n x n matrix whose i-th row is gradient(fields[i], x).
// LU with partial pivoting. Throws nonfinite_error on bad evaluations.
double jacobian_determinant(const std::vector<scalar_field>& fields,
                            const vecn& x);

// Determinant of an explicit dense matrix (rows of equal length).
double determinant(std::vector<vecn> rows);

// The unique v in R^n with <v, w> = det(u_1, ..., u_{n-1}, w) for all w,
// i.e. the Hodge dual of the wedge of the n-1 input vectors, computed by
// signed cofactor expansion. Classical cross product when n = 3.
vecn generalized_cross(const std::vector<vecn>& u);

// Solves the dense system <rows_i, X> = rhs_i by LU with partial pivoting.
// Throws singular_matrix_error when |det| < 1e-12 * prod_i ||rows_i||
// (or when some row vanishes) — the signal for dependent gradients.
vecn linear_solve(const std::vector<vecn>& rows, const vecn& rhs);

// Integral over one period of a smooth 2*pi-periodic function, by the
// trapezoid rule on N uniform samples (spectrally accurate). N must be a
// power of two >= 16. Throws std::invalid_argument otherwise and
// nonfinite_error on bad evaluations.
double periodic_quadrature(const std::function<double(double)>& g, int n);

// Integral of g over [a, b] by adaptive Gauss-Legendre panels (15-point
// rule, bisection until the two-half refinement changes a panel by less
// than tol * scale). Intended for mildly singular integrands whose
// singularities lie outside [a, b].
double adaptive_gauss_legendre(const std::function<double(double)>& g,
                               double a, double b, double tol = 1e-10);

// Exact closed form of T(i, j) = integral over [0, 2*pi) of
// cos^i(t) sin^j(t) dt: zero when i or j is odd; for i = 2p, j = 2q the
// half-integer Gamma-function reduction evaluated as an incremental product
// of small ratios. Guarded for i + j <= 64 (overflow_guard_error beyond).
double trig_moment(int i, int j);

// Brent-style bracketed root refinement: given g(a) * g(b) < 0, returns a
// root location with bracket width <= tol. Throws no_sign_change_error when
// the precondition fails (exact zeros at an endpoint are accepted).
double refine_root(const std::function<double(double)>& g, double a, double b,
                   double tol);

// True when every component is finite.
bool all_finite(const vecn& v);

}  // namespace leafcycle
