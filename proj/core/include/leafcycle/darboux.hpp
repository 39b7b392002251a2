// leafcycle: Darboux charts for completely integrable systems.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// A chart Phi = (Phi_1, Phi_2, C_1, ..., C_{n-2}) maps the system domain to
// coordinates in which the dynamics is planar-Hamiltonian in (y_1, y_2) with
// a scalar rescaling nu_Phi, and trivial in the leaf coordinates
// y_3, ..., y_n (which equal the Casimir values). The flow-box variant is
// the special case Phi_2 = H, in which the pushforward field becomes
// (nu_Phi, 0, ..., 0).

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "leafcycle/integrable.hpp"
#include "leafcycle/numkernel.hpp"

namespace leafcycle {

// Leaf parameters: the values (c_1, ..., c_{n-2}) of the Casimirs.
struct leaf_coordinates {
  vecn c;
};

struct darboux_chart {
  integrable_system sys;
  scalar_field phi1;
  scalar_field phi2;
  // Closed-form inverse, when available (the built-in family always has
  // one). Otherwise inverse() runs damped Newton from a caller guess.
  std::function<vecn(const vecn&)> analytic_inverse;
  // The chart image W'; empty predicate means "everywhere".
  std::function<bool(const vecn&)> image_domain;
  // The chart source Omega' (e.g. a sign orthant); empty means Omega.
  std::function<bool(const vecn&)> source_domain;

  bool image_contains(const vecn& y) const {
    return !image_domain || image_domain(y);
  }
  bool source_contains(const vecn& x) const {
    return sys.contains(x) && (!source_domain || source_domain(x));
  }
};

// Validates arities; throws std::invalid_argument.
void validate(const darboux_chart& chart);

// y = (Phi_1(x), Phi_2(x), C_1(x), ..., C_{n-2}(x)).
// Throws outside_domain_error when x is outside Omega'.
vecn forward(const darboux_chart& chart, const vecn& x);

// The n x n forward Jacobian at x: row i is the gradient of component i.
std::vector<vecn> chart_jacobian(const darboux_chart& chart, const vecn& x);

// Determinant of the forward Jacobian at x.
double chart_jacobian_determinant(const darboux_chart& chart, const vecn& x);

// Inverse map: the analytic inverse when supplied; otherwise damped Newton
// on forward(x) = y starting from `guess` (tolerance 1e-12, at most 50
// iterations, step halving until the residual decreases).
// Throws outside_domain_error (y not in W'), no_convergence_error,
// singular_jacobian_error.
vecn inverse(const darboux_chart& chart, const vecn& y, const vecn& guess);
vecn inverse(const darboux_chart& chart, const vecn& y);  // analytic only

// nu_Phi(y) = nu(x) * det(DPhi(x)) with x = Phi^{-1}(y).
double nu_phi(const darboux_chart& chart, const vecn& y);

// Same quantity evaluated at a source point directly (no inverse round
// trip): nu(x) * det(DPhi(x)).
double nu_phi_at_source(const darboux_chart& chart, const vecn& x);

// Pushforward of a velocity field: DPhi(x) * field(x) at x = Phi^{-1}(y).
vecn pushforward_field(const darboux_chart& chart, const velocity_field& field,
                       const vecn& y);

// The Hamiltonian in chart coordinates, H(Phi^{-1}(y)).
double chart_hamiltonian(const darboux_chart& chart, const vecn& y);

// Residual of the planar-Hamiltonian normal form over sample points in W':
// max over points of the norm of
//   pushforward(X)(y) - nu_Phi(y) * ( dH~/dy_2, -dH~/dy_1, 0, ..., 0 )
// where H~ = H o Phi^{-1} and the partials are 4th-order finite differences
// in (y_1, y_2) with the leaf coordinates frozen.
struct darboux_report {
  double max_residual = 0.0;
};
darboux_report darboux_residual(const darboux_chart& chart,
                                const std::vector<vecn>& points_in_image);

// Chart health audit over sample points: least |Jacobian determinant|,
// worst forward-after-inverse roundtrip error, and whether nu_Phi keeps one
// sign (nonvanishing) on the sample.
struct chart_audit_report {
  double min_abs_jacobian = 0.0;
  double max_roundtrip_error = 0.0;
  bool nu_phi_sign_constant = true;
  double min_abs_nu_phi = 0.0;
};
chart_audit_report chart_audit(const darboux_chart& chart,
                               const std::vector<vecn>& points_in_image);

}  // namespace leafcycle
