// leafcycle: first-order displacement integrals (implementation).
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace leafcycle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_h(const orbit_parameterization& orbit, double h) {
  if (!(h > orbit.h_min) || !(h < orbit.h_max))
    throw outside_range_error("orbit: h outside the open orbit-family range");
}

// d(curve)/dtheta: analytic when provided, else 4th-order central
// differences in theta (the curve is smooth and 2*pi-periodic).
std::array<double, 2> curve_tangent_at(const orbit_parameterization& orbit,
                                       double h, double theta) {
  if (orbit.curve_tangent) return orbit.curve_tangent(h, theta);
  static const double step = std::cbrt(std::numeric_limits<double>::epsilon());
  const auto yp2 = orbit.curve(h, theta + 2.0 * step);
  const auto yp1 = orbit.curve(h, theta + step);
  const auto ym1 = orbit.curve(h, theta - step);
  const auto ym2 = orbit.curve(h, theta - 2.0 * step);
  std::array<double, 2> d;
  for (int i = 0; i < 2; ++i)
    d[i] = (ym2[i] - 8.0 * ym1[i] + 8.0 * yp1[i] - yp2[i]) / (12.0 * step);
  return d;
}

}  // namespace

vecn orbit_chart_point(const orbit_parameterization& orbit, double h,
                       double theta) {
  check_h(orbit, h);
  const auto y12 = orbit.curve(h, theta);
  vecn y(2 + orbit.leaf.c.size());
  y[0] = y12[0];
  y[1] = y12[1];
  for (std::size_t i = 0; i < orbit.leaf.c.size(); ++i)
    y[i + 2] = orbit.leaf.c[i];
  return y;
}

vecn orbit_ambient_point(const orbit_parameterization& orbit, double h,
                         double theta) {
  if (!orbit.chart)
    throw std::invalid_argument("orbit_ambient_point: orbit carries no chart");
  return inverse(*orbit.chart, orbit_chart_point(orbit, h, theta));
}

std::vector<vecn> orbit_ambient_polyline(const orbit_parameterization& orbit,
                                         double h, int m) {
  if (m < 3)
    throw std::invalid_argument("orbit_ambient_polyline: too few points");
  std::vector<vecn> pts;
  pts.reserve(m + 1);
  for (int i = 0; i < m; ++i)
    pts.push_back(orbit_ambient_point(orbit, h, kTwoPi * i / m));
  pts.push_back(pts.front());  // close the loop
  return pts;
}

namespace {

double quadrature_over_orbit(const orbit_parameterization& orbit,
                             const scalar_field& p1, const scalar_field& p2,
                             double h, int n_quad, bool absolute) {
  check_h(orbit, h);
  const std::size_t n_leaf = orbit.leaf.c.size();
  vecn y(2 + n_leaf);
  for (std::size_t i = 0; i < n_leaf; ++i) y[i + 2] = orbit.leaf.c[i];
  auto integrand = [&](double theta) {
    const auto y12 = orbit.curve(h, theta);
    const auto dy = curve_tangent_at(orbit, h, theta);
    y[0] = y12[0];
    y[1] = y12[1];
    const double v = -p1.eval(y) * dy[1] + p2.eval(y) * dy[0];
    return absolute ? std::abs(v) : v;
  };
  return periodic_quadrature(integrand, n_quad);
}

}  // namespace

double melnikov_integral(const orbit_parameterization& orbit,
                         const scalar_field& p1, const scalar_field& p2,
                         double h, int n_quad) {
  return quadrature_over_orbit(orbit, p1, p2, h, n_quad, false);
}

double melnikov_integrand_l1(const orbit_parameterization& orbit,
                             const scalar_field& p1, const scalar_field& p2,
                             double h, int n_quad) {
  return quadrature_over_orbit(orbit, p1, p2, h, n_quad, true);
}

melnikov_curve melnikov_scan(const orbit_parameterization& orbit,
                             const scalar_field& p1, const scalar_field& p2,
                             int samples, int n_quad) {
  if (samples < 32)
    throw std::invalid_argument("melnikov_scan: need at least 32 samples");
  melnikov_curve curve;
  curve.leaf = orbit.leaf;
  const double width = orbit.h_max - orbit.h_min;
  const double margin = 1e-6 * width;
  curve.h_min = orbit.h_min + margin;
  curve.h_max = orbit.h_max - margin;
  curve.evaluator = [orbit, p1, p2, n_quad](double h) {
    return melnikov_integral(orbit, p1, p2, h, n_quad);
  };

  double l1_max = 0.0;
  curve.samples.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double h =
        curve.h_min + (curve.h_max - curve.h_min) * i / (samples - 1);
    const double value = curve.evaluator(h);
    curve.samples.emplace_back(h, value);
    curve.scale = std::max(curve.scale, std::abs(value));
    l1_max = std::max(
        l1_max, melnikov_integrand_l1(orbit, p1, p2, h, n_quad));
  }

  if (curve.scale < 1e-12 * std::max(1.0, l1_max)) {
    curve.all_zero = true;
    return curve;
  }

  // Isolate zeros: exact hits on grid points first, then sign-change
  // brackets, refined to a tight absolute tolerance.
  const double zero_eps = 1e-14 * std::max(1.0, curve.scale);
  const double root_tol = std::max(1e-13, 1e-12 * width);
  std::vector<double> roots;
  for (int i = 0; i + 1 < samples; ++i) {
    const auto& [ha, va] = curve.samples[i];
    const auto& [hb, vb] = curve.samples[i + 1];
    if (std::abs(va) <= zero_eps) {
      roots.push_back(ha);
      continue;
    }
    if (std::abs(vb) <= zero_eps) continue;  // picked up by the next interval
    if ((va > 0.0) != (vb > 0.0))
      roots.push_back(refine_root(curve.evaluator, ha, hb, root_tol));
  }
  if (!curve.samples.empty() &&
      std::abs(curve.samples.back().second) <= zero_eps)
    roots.push_back(curve.samples.back().first);

  // Deduplicate (an exact grid hit plus an adjacent bracket can double-count).
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) {
                            return std::abs(a - b) <= 16.0 * root_tol;
                          }),
              roots.end());

  for (double root : roots) {
    melnikov_zero z;
    z.h = root;
    z.derivative = melnikov_prime(curve, root);
    z.simple = std::abs(z.derivative) > 1e-6 * curve.scale;
    curve.zeros.push_back(z);
  }
  return curve;
}

double melnikov_prime(const melnikov_curve& curve, double h) {
  if (!(h > curve.h_min) || !(h < curve.h_max))
    throw outside_range_error("melnikov_prime: h outside the sampled range");
  if (!curve.evaluator)
    throw std::invalid_argument("melnikov_prime: curve has no evaluator");
  const double width = curve.h_max - curve.h_min;
  double step = std::min(1e-3 * width, 1e-3);
  // Keep the 4-point stencil inside the open range.
  const double room = std::min(h - curve.h_min, curve.h_max - h);
  if (2.0 * step >= room) step = 0.49 * room;
  const double fp2 = curve.evaluator(h + 2.0 * step);
  const double fp1 = curve.evaluator(h + step);
  const double fm1 = curve.evaluator(h - step);
  const double fm2 = curve.evaluator(h - 2.0 * step);
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step);
}

double melnikov_polynomial::eval(double h) const {
  double s = 0.0;
  for (std::size_t p = odd_coefficients.size(); p-- > 0;)
    s = s * h + odd_coefficients[p];
  return h * s;
}

double melnikov_polynomial::derivative(double h) const {
  // d/dh [ sum_p a_{2p+1} h^{p+1} ] = sum_p (p+1) a_{2p+1} h^p.
  double s = 0.0;
  for (std::size_t p = odd_coefficients.size(); p-- > 0;)
    s = s * h + (p + 1) * odd_coefficients[p];
  return s;
}

melnikov_polynomial polynomial_melnikov(const polynomial_perturbation& pp,
                                        const leaf_coordinates& leaf) {
  const int m = pp.m;
  // Only odd total degrees d = i + j contribute; each maps to the h-power
  // p = (d+1)/2 with weight 2^p * (-r_ij T(i+1, j) - s_ij T(i, j+1)).
  const int p_max = (m + 1) / 2;  // = ceil(m/2)
  melnikov_polynomial poly;
  poly.odd_coefficients.assign(p_max, 0.0);
  for (int d = 1; d <= m; d += 2) {
    const int p = (d + 1) / 2;
    double acc = 0.0;
    for (int i = 0; i <= d; ++i) {
      const int j = d - i;
      double rij = 0.0, sij = 0.0;
      if (i < static_cast<int>(pp.r.size()) &&
          j < static_cast<int>(pp.r[i].size()) && pp.r[i][j])
        rij = pp.r[i][j](leaf.c);
      if (i < static_cast<int>(pp.s.size()) &&
          j < static_cast<int>(pp.s[i].size()) && pp.s[i][j])
        sij = pp.s[i][j](leaf.c);
      if (rij != 0.0) acc -= rij * trig_moment(i + 1, j);
      if (sij != 0.0) acc -= sij * trig_moment(i, j + 1);
    }
    poly.odd_coefficients[p - 1] = std::ldexp(acc, p);  // acc * 2^p
  }
  return poly;
}

int zero_count_bound(int m) {
  if (m < 1) throw std::invalid_argument("zero_count_bound: m must be >= 1");
  return (m % 2 == 1) ? (m - 1) / 2 : (m - 2) / 2;
}

}  // namespace leafcycle
