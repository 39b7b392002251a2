// leafcycle: first-order displacement integrals and zero isolation.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// For a family of closed orbits gamma_h in the chart plane of one leaf, the
// first-order coefficient of the return displacement is the loop integral
//   I(h) = contour integral over gamma_h of ( -P_1 dy_2 + P_2 dy_1 ),
// computed by periodic quadrature against the counterclockwise
// parameterization of the family. The flow may traverse the orbits in
// either sense; its orientation relative to the parameterization (the
// factor sigma = +-1) is measured separately and reported alongside I by
// the cycle-hunting code, so the first-order displacement law reads
// delta(h, eps) ~= eps * sigma * I(h).
//
// For polynomial perturbations the integral collapses to an explicit odd
// polynomial in h through the closed-form full-period trigonometric
// moments; simple zeros of I locate bifurcating limit cycles.

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "leafcycle/darboux.hpp"
#include "leafcycle/numkernel.hpp"
#include "leafcycle/perturb.hpp"

namespace leafcycle {

// A one-parameter family of closed chart-plane curves on a fixed leaf:
// (h, theta in [0, 2*pi)) -> (y_1, y_2), counterclockwise in theta.
struct orbit_parameterization {
  std::function<std::array<double, 2>(double, double)> curve;
  // Analytic d/dtheta of the curve, when available (exactness matters for
  // tight quadrature tolerances); finite differences otherwise.
  std::function<std::array<double, 2>(double, double)> curve_tangent;
  double h_min = 0.0;
  double h_max = 0.0;
  leaf_coordinates leaf;
  // Chart for ambient lifts (kept by value; charts are immutable data).
  std::optional<darboux_chart> chart;
};

// Full chart point (y_1, y_2, c_1, ..., c_{n-2}) at (h, theta).
// Throws outside_range_error when h is outside (h_min, h_max).
vecn orbit_chart_point(const orbit_parameterization& orbit, double h,
                       double theta);

// Ambient lift of the same point through the chart inverse.
vecn orbit_ambient_point(const orbit_parameterization& orbit, double h,
                         double theta);

// Closed ambient polyline of gamma_h on m+1 points (last point repeats the
// first).
std::vector<vecn> orbit_ambient_polyline(const orbit_parameterization& orbit,
                                         double h, int m);

// One isolated zero of a sampled curve.
struct melnikov_zero {
  double h = 0.0;
  bool simple = true;  // false means "possibly multiple"
  double derivative = 0.0;
};

// A sampled Melnikov curve over one leaf with its isolated zeros.
struct melnikov_curve {
  leaf_coordinates leaf;
  std::vector<std::pair<double, double>> samples;  // (h, I(h)), increasing h
  std::vector<melnikov_zero> zeros;
  bool all_zero = false;   // max |I| below noise scale: no isolation possible
  double scale = 0.0;      // max |I| over the samples
  double h_min = 0.0, h_max = 0.0;
  std::function<double(double)> evaluator;  // re-evaluates I at arbitrary h
};

// The loop integral I(h) by periodic quadrature (n_quad samples; power of
// two >= 16). p1/p2 are chart-coordinate fields evaluated at
// (y_1, y_2, c_1, ..., c_{n-2}) with the leaf frozen.
double melnikov_integral(const orbit_parameterization& orbit,
                         const scalar_field& p1, const scalar_field& p2,
                         double h, int n_quad = 512);

// L1 magnitude of the same integrand (scale reference for the all-zero
// test).
double melnikov_integrand_l1(const orbit_parameterization& orbit,
                             const scalar_field& p1, const scalar_field& p2,
                             double h, int n_quad = 512);

// Samples I over a uniform h-grid strictly inside (h_min, h_max) (margin
// 1e-6 of the width), brackets sign changes, refines each zero, and
// classifies it as simple when |I'(h*)| exceeds 1e-6 times the curve scale.
// Sets all_zero when max |I| < 1e-12 * max(1, max L1 integrand magnitude).
melnikov_curve melnikov_scan(const orbit_parameterization& orbit,
                             const scalar_field& p1, const scalar_field& p2,
                             int samples, int n_quad = 512);

// Closed polynomial form for polynomial perturbations: returns the odd
// coefficients (a_1, a_3, a_5, ...) of I(h) = h*(a_1 + a_3 h + a_5 h^2 + ...)
// built from the exact trigonometric moments; degree in h is ceil(m/2).
struct melnikov_polynomial {
  std::vector<double> odd_coefficients;  // a_1, a_3, ...
  double eval(double h) const;
  double derivative(double h) const;
};
melnikov_polynomial polynomial_melnikov(const polynomial_perturbation& pp,
                                        const leaf_coordinates& leaf);

// Numerical d/dh of a sampled curve at h (4th-order finite differences on a
// local resample through curve.evaluator).
double melnikov_prime(const melnikov_curve& curve, double h);

// Upper bound on the number of isolated zeros of the polynomial form in
// (0, infinity): (m-1)/2 for odd m, (m-2)/2 for even m.
int zero_count_bound(int m);

}  // namespace leafcycle
