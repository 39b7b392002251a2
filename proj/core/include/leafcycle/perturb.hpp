// leafcycle: geometric perturbation construction.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// Two perturbation classes are built from chart data by solving the n x n
// gradient system at each point:
//   <grad Phi_1, A> = nu_Phi * P_1,   <grad Phi_2, A> = nu_Phi * P_2,
//   <grad C_i,   A> = sum_j (C_j - c_j) * R_ij      (leaf-fixed: tangent to
//                                                    one chosen leaf),
//   <grad C_i,   A> = 0                             (foliation-preserving:
//                                                    tangent to every leaf),
// with P_1, P_2 / Q_1, Q_2 and R_ij given in chart coordinates. The primary
// construction is the dense linear solve; an independent signed
// generalized-cross expansion is provided as a cross-check.

#pragma once

#include <functional>
#include <vector>

#include "leafcycle/darboux.hpp"
#include "leafcycle/integrable.hpp"
#include "leafcycle/numkernel.hpp"

namespace leafcycle {

// Perturbation tangent to the single leaf C = c. R may be empty (== 0).
struct leaf_perturbation {
  scalar_field p1;  // chart-coordinate fields (arity n, evaluated at Phi(x))
  scalar_field p2;
  std::vector<std::vector<scalar_field>> r;  // (n-2) x (n-2); empty means 0
  leaf_coordinates leaf;
};

// Perturbation tangent to every regular leaf.
struct foliated_perturbation {
  scalar_field q1;
  scalar_field q2;
};

// Polynomial perturbation in the chart plane:
//   Q_1(y) = sum_{i+j<=m} r_ij(c) y_1^i y_2^j,
//   Q_2(y) = sum_{i+j<=m} s_ij(c) y_1^i y_2^j,
// with coefficients that may depend on the leaf parameters c.
struct polynomial_perturbation {
  int m = 1;
  // coefficient tables indexed [i][j], i + j <= m; empty function means 0.
  std::vector<std::vector<std::function<double(const vecn&)>>> r;
  std::vector<std::vector<std::function<double(const vecn&)>>> s;
};

// Allocates empty (zero) coefficient tables for degree m.
polynomial_perturbation make_polynomial_perturbation(int m);

// Instantiates the chart-plane fields Q_1, Q_2 of a polynomial perturbation
// on a fixed leaf (coefficients evaluated at c once).
std::pair<scalar_field, scalar_field> polynomial_fields(
    const polynomial_perturbation& pp, const leaf_coordinates& leaf, int arity);

// The leaf-fixed perturbation field: solves the gradient system above at
// every evaluation point (throws singular_jacobian_error at non-regular
// points). nu_Phi is evaluated at the source point directly.
velocity_field leaf_fixed_field(const darboux_chart& chart,
                                const leaf_perturbation& spec);

// The foliation-preserving perturbation field.
velocity_field foliated_field(const darboux_chart& chart,
                              const foliated_perturbation& spec);

// Independent construction through the signed generalized-cross (Hodge
// dual) expansion of the same linear system; used to cross-check
// leaf_fixed_field / foliated_field.
velocity_field leaf_fixed_field_cross(const darboux_chart& chart,
                                      const leaf_perturbation& spec);
velocity_field foliated_field_cross(const darboux_chart& chart,
                                    const foliated_perturbation& spec);

// Tangency diagnostics.
// Foliation mode: max over points and i of |<grad C_i, A>|.
double foliation_tangency(const integrable_system& sys,
                          const velocity_field& a,
                          const std::vector<vecn>& points);
// Leaf mode: max over points and i of
// |<grad C_i, A> - sum_j (C_j(x) - c_j) R_ij(Phi(x))|.
double leaf_tangency(const darboux_chart& chart, const velocity_field& a,
                     const leaf_perturbation& spec,
                     const std::vector<vecn>& points);

// X + eps * A, pointwise.
velocity_field perturbed_field(const velocity_field& x,
                               const velocity_field& a, double eps);

}  // namespace leafcycle
