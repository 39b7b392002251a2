// leafcycle: the hyperelliptic verification family.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// The built-in n-dimensional completely integrable model:
//   H     = (x_1^2 + x_2^2) / 2
//   C_i   = (k_i^2 x_1^2 + x_{i+2}^2) / 2     (i = 1, ..., n-2)
//   nu    = 1
// Its trajectories from (0, 1, ..., 1) are generalized Jacobi elliptic
// functions (sn, cn, dn_1, ..., dn_{n-2}); for n = 3, k = 1 they degenerate
// to (tanh, sech, sech). On a leaf with all c_i > 0 the chart disc has
// radius rho = min_i sqrt(2 c_i) / |k_i| and the closed orbits are the
// circles y_1^2 + y_2^2 = 2h with h in (0, rho^2 / 2), parameterized
// counterclockwise.

#pragma once

#include <vector>

#include "leafcycle/cycles.hpp"
#include "leafcycle/darboux.hpp"
#include "leafcycle/integrable.hpp"
#include "leafcycle/melnikov.hpp"
#include "leafcycle/numkernel.hpp"

namespace leafcycle {

struct hyperelliptic_params {
  int n = 3;
  vecn k;  // n-2 moduli (any finite values; zeros allowed)
};

// Branch signs (+1 or -1) choosing the orthant of the chart inverse, one
// per coordinate x_3, ..., x_n.
using sign_tuple = std::vector<int>;

// Throws std::invalid_argument on inconsistent sizes or non-finite moduli.
void validate(const hyperelliptic_params& params);
void validate(const hyperelliptic_params& params, const sign_tuple& signs);

// The model system with analytic gradients and nu = 1.
integrable_system build_system(const hyperelliptic_params& params);

// Chart (x_1, x_2, C_1, ..., C_{n-2}) with the closed-form inverse
//   x_{i+2} = signs_i * sqrt(2 y_{i+2} - k_i^2 y_1^2)
// on the image W' = { k_i^2 y_1^2 < 2 y_{i+2} for all i } and the source
// orthant Omega' = { signs_i * x_{i+2} > 0 }.
darboux_chart build_chart(const hyperelliptic_params& params,
                          const sign_tuple& signs);

// Chart disc radius on the leaf: min_i sqrt(2 c_i) / |k_i| (infinite when
// every modulus vanishes). Throws non_positive_leaf_error unless all
// c_i > 0.
double rho(const hyperelliptic_params& params, const leaf_coordinates& leaf);

// The counterclockwise circle family gamma_h: sqrt(2h)(cos theta, sin theta)
// with h in (0, rho^2 / 2), carrying the chart for ambient lifts.
orbit_parameterization orbit_family(const hyperelliptic_params& params,
                                    const sign_tuple& signs,
                                    const leaf_coordinates& leaf);

// State (sn, cn, dn_1, ..., dn_{n-2})(t): the flow of the realized field
// from (0, 1, ..., 1). Negative t integrates backward.
vecn jacobi_functions(const hyperelliptic_params& params, double t,
                      const integrator_config& cfg);

// First time > 0 at which any of the components x_2, ..., x_n vanishes
// (where sn stops being monotone). Returns +infinity when no zero occurs
// within cfg.max_time.
double monotonic_branch_end(const hyperelliptic_params& params,
                            const integrator_config& cfg);

// Inversion identity on the monotonic branch:
//   integral_0^{sn(t)} du / sqrt((1 - u^2) prod_i (1 - k_i^2 u^2)) = t.
// Throws outside_monotonic_branch_error when |t| reaches the branch end.
struct inversion_report {
  double sn = 0.0;
  double integral = 0.0;
  double residual = 0.0;  // |integral - t|
};
inversion_report inversion_check(const hyperelliptic_params& params, double t,
                                 const integrator_config& cfg);
// Variant with a precomputed branch end (avoids re-detecting it per call).
inversion_report inversion_check(const hyperelliptic_params& params, double t,
                                 const integrator_config& cfg,
                                 double branch_end);

}  // namespace leafcycle
