// Tests for the integration layer: the embedded Runge-Kutta pair with dense
// output, Poincare sections, the displacement function, orientation
// measurement, limit-cycle confirmation, and the Hausdorff distance.

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "leafcycle/cycles.hpp"
#include "leafcycle/errors.hpp"
#include "leafcycle/jacobi.hpp"
#include "leafcycle/melnikov.hpp"
#include "leafcycle/numkernel.hpp"
#include "leafcycle/perturb.hpp"

using leafcycle::darboux_chart;
using leafcycle::displacement;
using leafcycle::displacement_result;
using leafcycle::foliated_perturbation;
using leafcycle::hyperelliptic_params;
using leafcycle::integrate;
using leafcycle::integrator_config;
using leafcycle::leaf_coordinates;
using leafcycle::limit_cycle_report;
using leafcycle::orbit_parameterization;
using leafcycle::poincare_result;
using leafcycle::scalar_field;
using leafcycle::section_spec;
using leafcycle::sign_tuple;
using leafcycle::trajectory;
using leafcycle::vecn;
using leafcycle::velocity_field;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

velocity_field planar_rotation() {
  velocity_field f;
  f.arity = 2;
  f.eval = [](const vecn& y) { return vecn{y[1], -y[0]}; };
  return f;
}

hyperelliptic_params unit_params() {
  hyperelliptic_params p;
  p.n = 3;
  p.k = {1.0};
  return p;
}

// The cubic radial perturbation in the chart plane: one simple Melnikov
// zero at h = 1/2 with I(h) = 2*pi*h*(2h - 1).
foliated_perturbation cubic_spec() {
  foliated_perturbation spec;
  spec.q1 = scalar_field{3, [](const vecn& y) {
                           return y[0] * (1.0 - (y[0] * y[0] + y[1] * y[1]));
                         }};
  spec.q2 = scalar_field{3, [](const vecn&) { return 0.0; }};
  return spec;
}

struct cubic_setup {
  darboux_chart chart;
  orbit_parameterization orbit;
  velocity_field base;
  velocity_field bump;
};

cubic_setup make_cubic_setup() {
  const hyperelliptic_params params = unit_params();
  const sign_tuple signs{1};
  leaf_coordinates leaf;
  leaf.c = {2.0};
  cubic_setup s;
  s.chart = leafcycle::build_chart(params, signs);
  s.orbit = leafcycle::orbit_family(params, signs, leaf);
  s.base = leafcycle::realized_field(s.chart.sys);
  s.bump = leafcycle::foliated_field(s.chart, cubic_spec());
  return s;
}

std::vector<vecn> circle_polyline(double radius, int points) {
  std::vector<vecn> out;
  out.reserve(points + 1);
  for (int i = 0; i < points; ++i) {
    const double th = 2.0 * kPi * i / points;
    out.push_back(vecn{radius * std::cos(th), radius * std::sin(th)});
  }
  out.push_back(out.front());
  return out;
}

}  // namespace

TEST_CASE("rotation field returns to its start after a full turn") {
  const integrator_config cfg;
  const trajectory traj = integrate(planar_rotation(), {1.0, 0.0}, 2.0 * kPi, cfg);
  CHECK(std::abs(traj.y_final[0] - 1.0) <= 1e-9);
  CHECK(std::abs(traj.y_final[1]) <= 1e-9);
  CHECK(traj.steps_accepted > 0);

  // Dense output against the exact solution (cos t, -sin t).
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 2.0 * kPi * i / 200.0;
    const vecn y = traj.at(t);
    worst = std::max(worst, std::abs(y[0] - std::cos(t)));
    worst = std::max(worst, std::abs(y[1] + std::sin(t)));
  }
  CHECK(worst <= 1e-8);

  // at() clamps outside the integration window.
  const vecn before = traj.at(-5.0);
  CHECK(before[0] == doctest::Approx(1.0));
  const vecn after = traj.at(100.0);
  CHECK(after[0] == doctest::Approx(traj.y_final[0]));
}

TEST_CASE("backward integration works and lands on the exact state") {
  const integrator_config cfg;
  const trajectory traj =
      integrate(planar_rotation(), {1.0, 0.0}, -kPi / 2.0, cfg);
  // Exact solution at t = -pi/2 is (cos t, -sin t) = (0, 1).
  CHECK(std::abs(traj.y_final[0]) <= 1e-9);
  CHECK(std::abs(traj.y_final[1] - 1.0) <= 1e-9);
  CHECK(traj.t_final == doctest::Approx(-kPi / 2.0));
}

TEST_CASE("long runs conserve the model invariants at integrator accuracy") {
  const hyperelliptic_params params = unit_params();
  const auto sys = leafcycle::build_system(params);
  const velocity_field field = leafcycle::realized_field(sys);
  const vecn x0{0.6, 0.0, 1.2};
  const double h0 = sys.hamiltonian.eval(x0);
  const double c0 = sys.casimirs[0].eval(x0);

  const integrator_config cfg;
  const trajectory traj = integrate(field, x0, 50.0, cfg);
  CHECK(std::abs(sys.hamiltonian.eval(traj.y_final) - h0) <= 1e-8);
  CHECK(std::abs(sys.casimirs[0].eval(traj.y_final) - c0) <= 1e-8);
}

TEST_CASE("tighter tolerances tighten the answer") {
  integrator_config loose;
  loose.rel_tol = 1e-6;
  loose.abs_tol = 1e-8;
  integrator_config tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;

  const vecn x0{1.0, 0.0};
  const double t_end = 10.0 * kPi;  // five turns
  const trajectory a = integrate(planar_rotation(), x0, t_end, loose);
  const trajectory b = integrate(planar_rotation(), x0, t_end, tight);
  const double err_a = std::hypot(a.y_final[0] - 1.0, a.y_final[1]);
  const double err_b = std::hypot(b.y_final[0] - 1.0, b.y_final[1]);
  CHECK(err_b < err_a);
  CHECK(err_b <= 1e-10);
  CHECK(b.steps_accepted > a.steps_accepted);
}

TEST_CASE("integration stops at the domain boundary") {
  velocity_field drift;
  drift.arity = 2;
  drift.eval = [](const vecn&) { return vecn{1.0, 0.0}; };

  const integrator_config cfg;
  CHECK_THROWS_AS(
      integrate(drift, {0.0, 0.0}, 10.0, cfg,
                [](const vecn& x) { return x[0] < 1.0; }),
      leafcycle::domain_exit_error);
  // Starting outside the domain fails immediately.
  CHECK_THROWS_AS(
      integrate(drift, {5.0, 0.0}, 1.0, cfg,
                [](const vecn& x) { return x[0] < 1.0; }),
      leafcycle::domain_exit_error);
}

TEST_CASE("integrator configuration is validated") {
  integrator_config cfg;
  cfg.rel_tol = -1.0;
  CHECK_THROWS_AS(leafcycle::validate(cfg), leafcycle::error);
  cfg = integrator_config{};
  cfg.max_time = 0.0;
  CHECK_THROWS_AS(leafcycle::validate(cfg), leafcycle::error);
  CHECK_NOTHROW(leafcycle::validate(integrator_config{}));
}

TEST_CASE("poincare return finds the directional crossing") {
  // Solution from (1, 0) is (cos t, -sin t); y_2 = 0 is crossed decreasing
  // at t = 2*pi on the admissible half-plane y_1 > 0.
  section_spec section;
  section.sigma = leafcycle::coordinate_field(2, 1);
  section.direction = -1;
  section.admissible = [](const vecn& y) { return y[0] > 0.0; };

  const integrator_config cfg;
  const poincare_result ret =
      leafcycle::poincare_return(planar_rotation(), section, {1.0, 0.0}, cfg);
  CHECK(ret.t_return == doctest::Approx(2.0 * kPi).epsilon(1e-10));
  CHECK(ret.state[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(ret.state[1]) <= 1e-9);

  // Without the direction and admissibility filters the first crossing is
  // the antipodal one at t = pi.
  section_spec any;
  any.sigma = leafcycle::coordinate_field(2, 1);
  const poincare_result first =
      leafcycle::poincare_return(planar_rotation(), any, {1.0, 0.0}, cfg);
  CHECK(first.t_return == doctest::Approx(kPi).epsilon(1e-10));
  CHECK(first.state[0] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("poincare return gives up when no crossing exists") {
  velocity_field drift;
  drift.arity = 2;
  drift.eval = [](const vecn&) { return vecn{1.0, 0.0}; };
  section_spec section;
  section.sigma = scalar_field{2, [](const vecn& y) { return y[1] - 5.0; }};
  integrator_config cfg;
  cfg.max_time = 20.0;
  CHECK_THROWS_AS(
      leafcycle::poincare_return(drift, section, {0.0, 0.0}, cfg),
      leafcycle::no_return_error);
}

TEST_CASE("displacement follows the first-order law of the loop integral") {
  const cubic_setup s = make_cubic_setup();
  const integrator_config cfg;
  const double eps = 0.01;
  const velocity_field field = leafcycle::perturbed_field(s.base, s.bump, eps);

  const int sigma = leafcycle::orbit_orientation(s.base, s.orbit, 0.5);
  REQUIRE(sigma == -1);

  for (double h : {0.25, 0.75}) {
    const double loop = 2.0 * kPi * h * (2.0 * h - 1.0);
    const displacement_result d = displacement(field, s.orbit, h, cfg);
    // The second-order coefficient of delta/eps reaches about 14 at
    // h = 0.75 for this perturbation, so at eps = 0.01 the first-order
    // law holds to ~0.14; bound with margin.
    CHECK(std::abs(d.delta / eps - sigma * loop) <= 0.2);
    // Sign prediction: below the zero the energy grows, above it shrinks.
    if (h < 0.5) CHECK(d.delta > 0.0);
    if (h > 0.5) CHECK(d.delta < 0.0);
    CHECK(d.t_return > 0.0);
    CHECK(d.h_return == doctest::Approx(h + d.delta));
  }

  // The unperturbed field has zero displacement on every orbit (up to the
  // integrator's accumulated tolerance over one period).
  const displacement_result base_d = displacement(s.base, s.orbit, 0.6, cfg);
  CHECK(std::abs(base_d.delta) <= 1e-9);
}

TEST_CASE("orientation flips with the fiber sign") {
  const hyperelliptic_params params = unit_params();
  leaf_coordinates leaf;
  leaf.c = {2.0};

  const auto plus_orbit = leafcycle::orbit_family(params, {1}, leaf);
  const auto plus_field =
      leafcycle::realized_field(leafcycle::build_system(params));
  CHECK(leafcycle::orbit_orientation(plus_field, plus_orbit, 0.5) == -1);

  const auto minus_orbit = leafcycle::orbit_family(params, {-1}, leaf);
  CHECK(leafcycle::orbit_orientation(plus_field, minus_orbit, 0.5) == 1);
}

TEST_CASE("limit-cycle confirmation on the cubic family") {
  const cubic_setup s = make_cubic_setup();
  const integrator_config cfg;
  const double eps = 0.05;
  const velocity_field field = leafcycle::perturbed_field(s.base, s.bump, eps);

  const limit_cycle_report rep =
      leafcycle::find_limit_cycle(field, s.orbit, 0.5, eps, cfg);
  CHECK(std::abs(rep.h_eps - 0.5) <= 1e-6);
  CHECK(rep.period > 0.0);
  CHECK(rep.return_slope < 1.0);           // attracting: |slope| < 1 side
  CHECK(std::abs(rep.return_slope - 1.0) > 1e-5);
  REQUIRE(rep.cycle_points.size() >= 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(rep.cycle_points.front()[i] ==
          doctest::Approx(rep.cycle_points.back()[i]));
  // The confirmed cycle hugs the source orbit.
  CHECK(rep.hausdorff_to_source <= 1e-3);

  // A flat displacement (zero perturbation) is rejected as non-isolated.
  CHECK_THROWS_AS(
      leafcycle::find_limit_cycle(s.base, s.orbit, 0.5, 0.0, cfg),
      leafcycle::not_isolated_error);
}

TEST_CASE("convergence study warm-starts and reports decay ratios") {
  const cubic_setup s = make_cubic_setup();
  const integrator_config cfg;
  const auto family = [&](double eps) {
    return leafcycle::perturbed_field(s.base, s.bump, eps);
  };

  const auto rep = leafcycle::convergence_study(family, s.orbit, 0.5,
                                                {0.1, 0.05}, cfg);
  REQUIRE(rep.entries.size() == 2);
  CHECK(rep.entries[0].ok);
  CHECK(rep.entries[1].ok);
  CHECK(rep.decay_ratios.size() == 1);

  CHECK_THROWS_AS(
      leafcycle::convergence_study(family, s.orbit, 0.5, {}, cfg),
      leafcycle::error);
  CHECK_THROWS_AS(
      leafcycle::convergence_study(family, s.orbit, 0.5, {0.05, 0.1}, cfg),
      leafcycle::error);
}

TEST_CASE("hausdorff distance on hand-checkable shapes") {
  const auto inner = circle_polyline(1.0, 256);
  const auto outer = circle_polyline(1.2, 256);
  CHECK(leafcycle::hausdorff_distance(inner, outer) ==
        doctest::Approx(0.2).epsilon(1e-3));
  CHECK(leafcycle::hausdorff_distance(inner, inner) <= 1e-12);

  // A single point against a circle: the distance is radius + offset on the
  // far side.
  const std::vector<vecn> point{vecn{2.0, 0.0}};
  CHECK(leafcycle::hausdorff_distance(point, inner) ==
        doctest::Approx(3.0).epsilon(1e-3));
}
