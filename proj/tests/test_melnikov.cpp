// Tests for the displacement-integral layer: orbit parameterizations, the
// loop integral by quadrature, the closed polynomial form via trigonometric
// moments, zero isolation, and the zero-count bound.

#include <doctest.h>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "leafcycle/errors.hpp"
#include "leafcycle/jacobi.hpp"
#include "leafcycle/melnikov.hpp"
#include "leafcycle/numkernel.hpp"
#include "leafcycle/perturb.hpp"

using leafcycle::hyperelliptic_params;
using leafcycle::leaf_coordinates;
using leafcycle::melnikov_curve;
using leafcycle::melnikov_polynomial;
using leafcycle::orbit_parameterization;
using leafcycle::polynomial_perturbation;
using leafcycle::scalar_field;
using leafcycle::sign_tuple;
using leafcycle::vecn;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

hyperelliptic_params make_params(std::vector<double> k) {
  hyperelliptic_params p;
  p.n = static_cast<int>(k.size()) + 2;
  p.k = std::move(k);
  return p;
}

orbit_parameterization unit_modulus_orbits(double c) {
  const hyperelliptic_params params = make_params({1.0});
  leaf_coordinates leaf;
  leaf.c = {c};
  return leafcycle::orbit_family(params, sign_tuple{1}, leaf);
}

// Q_1 = y_1 (1 - (y_1^2 + y_2^2)), Q_2 = 0. Along the circle of energy h the
// loop integral is 2*pi*h*(2h - 1): one simple zero at h = 1/2.
scalar_field cubic_radial_q1() {
  return scalar_field{3, [](const vecn& y) {
                        return y[0] * (1.0 - (y[0] * y[0] + y[1] * y[1]));
                      }};
}

scalar_field zero_field3() {
  return scalar_field{3, [](const vecn&) { return 0.0; }};
}

}  // namespace

TEST_CASE("orbit family geometry: chart points, ambient lifts, ranges") {
  const orbit_parameterization orbit = unit_modulus_orbits(2.0);
  CHECK(orbit.h_min == doctest::Approx(0.0));
  CHECK(orbit.h_max == doctest::Approx(2.0));  // rho = 2, h_max = rho^2/2

  const vecn y = leafcycle::orbit_chart_point(orbit, 0.5, 0.0);
  REQUIRE(y.size() == 3);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(2.0));

  // Quarter turn is counterclockwise.
  const vecn yq = leafcycle::orbit_chart_point(orbit, 0.5, kPi / 2.0);
  CHECK(yq[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(yq[1] == doctest::Approx(1.0));

  const vecn x = leafcycle::orbit_ambient_point(orbit, 0.5, 0.0);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(x[2] == doctest::Approx(std::sqrt(3.0)));

  CHECK_THROWS_AS(leafcycle::orbit_chart_point(orbit, 3.0, 0.0),
                  leafcycle::outside_range_error);
  CHECK_THROWS_AS(leafcycle::orbit_chart_point(orbit, 0.0, 0.0),
                  leafcycle::outside_range_error);
}

TEST_CASE("ambient polyline closes and stays on the level sets") {
  const orbit_parameterization orbit = unit_modulus_orbits(2.0);
  const double h = 0.8;
  const auto poly = leafcycle::orbit_ambient_polyline(orbit, h, 64);
  REQUIRE(poly.size() == 65);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(poly.front()[i] == doctest::Approx(poly.back()[i]).epsilon(1e-12));
  for (const vecn& x : poly) {
    CHECK(0.5 * (x[0] * x[0] + x[1] * x[1]) == doctest::Approx(h).epsilon(1e-12));
    CHECK(0.5 * (x[0] * x[0] + x[2] * x[2]) ==
          doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("loop integral reproduces hand-computed values") {
  const orbit_parameterization orbit = unit_modulus_orbits(2.0);

  // P_1 = y_1, P_2 = 0: the integral is -2*pi*h.
  const scalar_field p1{3, [](const vecn& y) { return y[0]; }};
  for (double h : {0.2, 0.5, 1.0, 1.7}) {
    const double got = leafcycle::melnikov_integral(orbit, p1, zero_field3(), h);
    CHECK(got == doctest::Approx(-2.0 * kPi * h).epsilon(1e-12));
  }

  // The cubic radial perturbation: 2*pi*h*(2h - 1).
  const scalar_field q1 = cubic_radial_q1();
  for (double h : {0.1, 0.3, 0.5, 0.9, 1.5}) {
    const double got = leafcycle::melnikov_integral(orbit, q1, zero_field3(), h);
    CHECK(got == doctest::Approx(2.0 * kPi * h * (2.0 * h - 1.0))
                     .epsilon(1e-11));
  }

  // Exact-form pair (y_2, y_1) integrates to zero on every circle.
  const scalar_field e1{3, [](const vecn& y) { return y[1]; }};
  const scalar_field e2{3, [](const vecn& y) { return y[0]; }};
  for (double h : {0.25, 0.75})
    CHECK(std::abs(leafcycle::melnikov_integral(orbit, e1, e2, h)) <= 1e-12);
}

TEST_CASE("loop integral is linear in the perturbation pair") {
  const orbit_parameterization orbit = unit_modulus_orbits(1.5);
  const scalar_field a1{3, [](const vecn& y) { return y[0] * y[1] + 0.4; }};
  const scalar_field a2{3, [](const vecn& y) { return y[1] * y[1]; }};
  const scalar_field b1{3, [](const vecn& y) { return y[0] * y[0] * y[0]; }};
  const scalar_field b2{3, [](const vecn& y) { return y[0] - y[1]; }};
  const double alpha = 1.7, beta = -0.6;
  const scalar_field m1{3, [=](const vecn& y) {
                          return alpha * a1.eval(y) + beta * b1.eval(y);
                        }};
  const scalar_field m2{3, [=](const vecn& y) {
                          return alpha * a2.eval(y) + beta * b2.eval(y);
                        }};
  const double h = 0.6;
  const double ia = leafcycle::melnikov_integral(orbit, a1, a2, h);
  const double ib = leafcycle::melnikov_integral(orbit, b1, b2, h);
  const double im = leafcycle::melnikov_integral(orbit, m1, m2, h);
  CHECK(im == doctest::Approx(alpha * ia + beta * ib).epsilon(1e-12));
}

TEST_CASE("scan isolates the cubic zero and measures its derivative") {
  const orbit_parameterization orbit = unit_modulus_orbits(2.0);
  const melnikov_curve curve = leafcycle::melnikov_scan(
      orbit, cubic_radial_q1(), zero_field3(), 200);

  CHECK_FALSE(curve.all_zero);
  REQUIRE(curve.zeros.size() == 1);
  CHECK(curve.zeros[0].h == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(curve.zeros[0].simple);
  CHECK(curve.zeros[0].derivative == doctest::Approx(2.0 * kPi).epsilon(1e-6));

  // The resampling derivative helper agrees.
  CHECK(leafcycle::melnikov_prime(curve, 0.5) ==
        doctest::Approx(2.0 * kPi).epsilon(1e-6));

  // Samples live strictly inside the h-range and increase.
  REQUIRE(!curve.samples.empty());
  CHECK(curve.samples.front().first > 0.0);
  CHECK(curve.samples.back().first < 2.0);
  for (std::size_t i = 1; i < curve.samples.size(); ++i)
    CHECK(curve.samples[i].first > curve.samples[i - 1].first);
}

TEST_CASE("scan flags identically vanishing integrals instead of inventing zeros") {
  const orbit_parameterization orbit = unit_modulus_orbits(2.0);

  // Exact-form pair: the integrand is nonzero but integrates to zero.
  const scalar_field e1{3, [](const vecn& y) { return y[1]; }};
  const scalar_field e2{3, [](const vecn& y) { return y[0]; }};
  const melnikov_curve exact = leafcycle::melnikov_scan(orbit, e1, e2, 64);
  CHECK(exact.all_zero);
  CHECK(exact.zeros.empty());

  // Literally zero perturbation.
  const melnikov_curve null_curve =
      leafcycle::melnikov_scan(orbit, zero_field3(), zero_field3(), 64);
  CHECK(null_curve.all_zero);
  CHECK(null_curve.zeros.empty());
}

TEST_CASE("closed polynomial form matches quadrature on random tables") {
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> leafc(0.5, 3.0);
  std::uniform_real_distribution<double> modulus(0.5, 1.5);
  std::uniform_int_distribution<int> degree(1, 9);
  std::uniform_real_distribution<double> hfrac(0.05, 0.95);

  for (int trial = 0; trial < 12; ++trial) {
    const int m = degree(rng);
    polynomial_perturbation pp = leafcycle::make_polynomial_perturbation(m);
    for (int i = 0; i <= m; ++i)
      for (int j = 0; i + j <= m; ++j) {
        if (coeff(rng) > 0.4) continue;  // sparse tables
        const double rv = coeff(rng), sv = coeff(rng);
        pp.r[i][j] = [rv](const vecn&) { return rv; };
        pp.s[i][j] = [sv](const vecn&) { return sv; };
      }

    const hyperelliptic_params params = make_params({modulus(rng)});
    leaf_coordinates leaf;
    leaf.c = {leafc(rng)};
    const orbit_parameterization orbit =
        leafcycle::orbit_family(params, sign_tuple{1}, leaf);
    const melnikov_polynomial closed = leafcycle::polynomial_melnikov(pp, leaf);
    const auto [f1, f2] = leafcycle::polynomial_fields(pp, leaf, 3);

    for (int probe = 0; probe < 5; ++probe) {
      const double h = hfrac(rng) * std::min(orbit.h_max, 2.0);
      const double via_quad = leafcycle::melnikov_integral(orbit, f1, f2, h);
      const double via_moments = closed.eval(h);
      CHECK(std::abs(via_quad - via_moments) <=
            1e-9 * std::max(1.0, std::abs(via_moments)));
    }
  }
}

TEST_CASE("closed polynomial form pins the cubic and linear families") {
  leaf_coordinates leaf;
  leaf.c = {2.0};

  // Q_1 = y_1: I(h) = -2*pi*h.
  polynomial_perturbation lin = leafcycle::make_polynomial_perturbation(1);
  lin.r[1][0] = [](const vecn&) { return 1.0; };
  const melnikov_polynomial linear_form = leafcycle::polynomial_melnikov(lin, leaf);
  REQUIRE(linear_form.odd_coefficients.size() == 1);
  CHECK(linear_form.odd_coefficients[0] == doctest::Approx(-2.0 * kPi));
  CHECK(linear_form.eval(0.7) == doctest::Approx(-1.4 * kPi));
  CHECK(linear_form.derivative(0.7) == doctest::Approx(-2.0 * kPi));

  // The cubic radial table: I(h) = 2*pi*h*(2h - 1) = h*(-2*pi + 4*pi*h).
  polynomial_perturbation cubic = leafcycle::make_polynomial_perturbation(3);
  cubic.r[1][0] = [](const vecn&) { return 1.0; };
  cubic.r[3][0] = [](const vecn&) { return -1.0; };
  cubic.r[1][2] = [](const vecn&) { return -1.0; };
  const melnikov_polynomial cubic_form =
      leafcycle::polynomial_melnikov(cubic, leaf);
  REQUIRE(cubic_form.odd_coefficients.size() == 2);
  CHECK(cubic_form.odd_coefficients[0] == doctest::Approx(-2.0 * kPi));
  CHECK(cubic_form.odd_coefficients[1] == doctest::Approx(4.0 * kPi));
  CHECK(cubic_form.eval(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(cubic_form.derivative(0.5) == doctest::Approx(2.0 * kPi));
}

TEST_CASE("designed degree-five table produces exactly the intended zeros") {
  // Coefficients chosen so that I(h) = pi*h*(h - 0.3)*(h - 0.7).
  polynomial_perturbation pp = leafcycle::make_polynomial_perturbation(5);
  pp.r[1][0] = [](const vecn&) { return -0.105; };
  pp.r[3][0] = [](const vecn&) { return 1.0 / 3.0; };
  pp.r[5][0] = [](const vecn&) { return -0.2; };

  leaf_coordinates leaf;
  leaf.c = {2.0};
  const melnikov_polynomial closed = leafcycle::polynomial_melnikov(pp, leaf);
  REQUIRE(closed.odd_coefficients.size() == 3);
  CHECK(closed.odd_coefficients[0] ==
        doctest::Approx(0.21 * kPi).epsilon(1e-12));
  CHECK(closed.odd_coefficients[1] == doctest::Approx(-kPi).epsilon(1e-12));
  CHECK(closed.odd_coefficients[2] == doctest::Approx(kPi).epsilon(1e-12));

  const orbit_parameterization orbit = unit_modulus_orbits(2.0);
  const auto [f1, f2] = leafcycle::polynomial_fields(pp, leaf, 3);
  const melnikov_curve curve = leafcycle::melnikov_scan(orbit, f1, f2, 400);
  REQUIRE(curve.zeros.size() == 2);
  CHECK(curve.zeros[0].h == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(curve.zeros[1].h == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(curve.zeros[0].simple);
  CHECK(curve.zeros[1].simple);
  CHECK(static_cast<int>(curve.zeros.size()) <= leafcycle::zero_count_bound(5));
}

TEST_CASE("zero-count bound has the right staircase values") {
  CHECK(leafcycle::zero_count_bound(1) == 0);
  CHECK(leafcycle::zero_count_bound(2) == 0);
  CHECK(leafcycle::zero_count_bound(3) == 1);
  CHECK(leafcycle::zero_count_bound(4) == 1);
  CHECK(leafcycle::zero_count_bound(5) == 2);
  CHECK(leafcycle::zero_count_bound(6) == 2);
  CHECK(leafcycle::zero_count_bound(7) == 3);
}

TEST_CASE("random tables never exceed the zero-count bound") {
  std::mt19937_64 rng(223);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> degree(3, 7);
  const orbit_parameterization orbit = unit_modulus_orbits(2.0);
  leaf_coordinates leaf;
  leaf.c = {2.0};

  for (int trial = 0; trial < 10; ++trial) {
    const int m = degree(rng);
    polynomial_perturbation pp = leafcycle::make_polynomial_perturbation(m);
    for (int i = 0; i <= m; ++i)
      for (int j = 0; i + j <= m; ++j) {
        if (coeff(rng) > 0.2) continue;
        const double rv = coeff(rng), sv = coeff(rng);
        pp.r[i][j] = [rv](const vecn&) { return rv; };
        pp.s[i][j] = [sv](const vecn&) { return sv; };
      }
    const auto [f1, f2] = leafcycle::polynomial_fields(pp, leaf, 3);
    const melnikov_curve curve = leafcycle::melnikov_scan(orbit, f1, f2, 150);
    if (curve.all_zero) continue;
    CHECK(static_cast<int>(curve.zeros.size()) <=
          leafcycle::zero_count_bound(m));
  }
}
