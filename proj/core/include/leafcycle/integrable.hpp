// leafcycle: completely integrable systems and their bracket realization.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// An n-dimensional system with n-2 Casimir invariants C_1..C_{n-2}, a
// Hamiltonian H, and a nonvanishing rescaling nu is realized through the
// Jacobian-determinant (Nambu) bracket: component i of the vector field is
//   X_i(x) = nu(x) * det( grad C_1, ..., grad C_{n-2}, e_i, grad H )(x),
// and the induced Poisson bracket on functions is
//   {f, g}(x) = nu(x) * det( grad C_1, ..., grad C_{n-2}, grad f, grad g )(x).

#pragma once

#include <functional>
#include <vector>

#include "leafcycle/numkernel.hpp"

namespace leafcycle {

// Right-hand side of an autonomous ODE on R^n.
struct velocity_field {
  int arity = 0;
  std::function<vecn(const vecn&)> eval;
};

// A completely integrable system: n-2 Casimirs, a Hamiltonian, a rescaling
// field nu, and a domain predicate. All fields must share arity n.
struct integrable_system {
  int n = 0;
  std::vector<scalar_field> casimirs;  // C_1 .. C_{n-2}
  scalar_field hamiltonian;            // H
  scalar_field rescale;                // nu (taken as input; validated a posteriori)
  std::function<bool(const vecn&)> in_domain;  // Omega; empty means "everywhere"

  bool contains(const vecn& x) const { return !in_domain || in_domain(x); }
};

// Validates arities and basic well-formedness; throws std::invalid_argument.
void validate(const integrable_system& sys);

// The bracket-realized vector field at x:
//   X_i = nu(x) * det(grad C_1, ..., grad C_{n-2}, e_i, grad H).
// The coordinate slot is filled with the i-th standard basis vector rather
// than a separate field object. Throws outside_domain_error / nonfinite_error.
vecn vector_field_at(const integrable_system& sys, const vecn& x);

// The whole field as a reusable velocity_field.
velocity_field realized_field(const integrable_system& sys);

// Poisson bracket {f, g} at x (see header comment).
double poisson_bracket(const integrable_system& sys, const scalar_field& f,
                       const scalar_field& g, const vecn& x);

// First-integral drift diagnostics: the largest |<grad C_i, field>| over the
// sample points (and over i), and the same for H. For the unperturbed field
// both vanish to round-off; for a leafwise-tangent perturbation only the
// Casimir part does.
struct drift_report {
  double max_casimir_drift = 0.0;
  double max_hamiltonian_drift = 0.0;
};
drift_report first_integral_drift(const integrable_system& sys,
                                  const velocity_field& field,
                                  const std::vector<vecn>& points);

}  // namespace leafcycle
