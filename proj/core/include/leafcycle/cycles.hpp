// leafcycle: ODE integration, Poincare sections, displacement, and
// limit-cycle detection.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// The integrator is an embedded explicit Runge-Kutta 5(4) pair
// (Dormand-Prince coefficients, first-same-as-last) with PI step-size
// control and 5th-order dense output. Section crossings are bracketed on
// the dense output and then refined by re-integrating from the step start
// inside a Brent iteration, so interpolation constants stay off the
// accuracy-critical path.
//
// The displacement function is
//   delta(h, eps) = (Hamiltonian in chart coordinates at the first return)
//                   - h,
// measured from the section {y_2 = 0, y_1 > 0} of the orbit family; its
// isolated zeros are limit cycles of the perturbed field. The measured
// orientation factor sigma (flow direction vs. the counterclockwise orbit
// parameterization) links delta to the Melnikov integral:
// delta ~= eps * sigma * I(h).

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "leafcycle/darboux.hpp"
#include "leafcycle/integrable.hpp"
#include "leafcycle/melnikov.hpp"
#include "leafcycle/numkernel.hpp"

namespace leafcycle {

struct integrator_config {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.0;   // 0 means "no cap"
  double max_time = 200.0; // time-horizon budget for open-ended searches

  bool operator==(const integrator_config&) const = default;
};
void validate(const integrator_config& cfg);

// One accepted step's dense-output segment.
struct dense_segment {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<vecn> rcont;  // 5 coefficient vectors

  // 5th-order interpolant over [t0, t0 + h].
  vecn eval(double t) const;
  double eval_component(double t, int i) const;
};

// A dense trajectory over [t_start, t_final].
struct trajectory {
  double t_start = 0.0;
  double t_final = 0.0;
  vecn y_start;
  vecn y_final;
  std::vector<dense_segment> segments;
  long steps_accepted = 0;
  long steps_rejected = 0;

  // Interpolated state at t (clamped to [t_start, t_final]).
  vecn at(double t) const;
};

// Integrates x' = field(x) from x0 over [0, t_end] (t_end may be negative).
// An optional domain predicate stops the run with domain_exit_error (the
// exit time is bisected on the dense output). Throws step_underflow_error,
// time_budget_error, nonfinite_error.
trajectory integrate(const velocity_field& field, const vecn& x0, double t_end,
                     const integrator_config& cfg,
                     const std::function<bool(const vecn&)>& domain = {});

// A transversal section sigma(x) = 0 with a crossing direction and an
// admissibility predicate evaluated at the crossing point.
struct section_spec {
  scalar_field sigma;
  int direction = 0;  // +1: sigma increasing, -1: decreasing, 0: either
  std::function<bool(const vecn&)> admissible;  // empty means "always"
};

// Integrates from x0 until the next admissible directional crossing of the
// section and returns the crossing state and time. A crossing at the start
// point itself is skipped (the trajectory must first leave the section).
// Throws no_return_error when cfg.max_time elapses without a crossing.
struct poincare_result {
  vecn state;
  double t_return = 0.0;
};
poincare_result poincare_return(const velocity_field& field,
                                const section_spec& section, const vecn& x0,
                                const integrator_config& cfg,
                                const std::function<bool(const vecn&)>& domain = {});

// delta(h, eps) = chart Hamiltonian at the first return minus h, starting
// from the theta = 0 section point of gamma_h. Also reports the return time
// and the return state.
struct displacement_result {
  double delta = 0.0;
  double h_return = 0.0;
  double t_return = 0.0;
  vecn state;
};
displacement_result displacement(const velocity_field& field,
                                 const orbit_parameterization& orbit, double h,
                                 const integrator_config& cfg);

// Measured orientation factor sigma: sign of the inner product between the
// pushforward of `field` and the counterclockwise curve tangent at the
// theta = 0 point of gamma_h. -1 means the flow runs clockwise (the
// displacement law is then delta ~= -eps * I).
int orbit_orientation(const velocity_field& field,
                      const orbit_parameterization& orbit, double h);

// A numerically confirmed limit cycle.
struct limit_cycle_report {
  double eps = 0.0;
  double h_star_source = 0.0;      // the Melnikov zero this cycle bifurcates from
  double h_eps = 0.0;              // chart Hamiltonian value on the section
  double period = 0.0;
  double return_slope = 0.0;       // d(eta)/dh at the fixed point
  double hausdorff_to_source = 0.0;
  std::vector<vecn> cycle_points;  // closed ambient polyline
};

// Secant iteration on delta(., eps) starting from h_guess (defaults to
// h_star when NaN). On convergence returns the closed orbit, its period,
// the return-map slope (finite differences), and the Hausdorff distance to
// the source orbit gamma_{h_star}.
// Throws no_convergence_error, not_isolated_error.
limit_cycle_report find_limit_cycle(
    const velocity_field& field, const orbit_parameterization& orbit,
    double h_star, double eps, const integrator_config& cfg,
    double h_guess = std::numeric_limits<double>::quiet_NaN());

// Convergence study over a strictly decreasing eps list with mandatory
// warm-starting (each hunt starts from the previous cycle's h). Records
// per-eps outcomes, the Hausdorff distances to gamma_{h_star}, and the
// consecutive decay ratios. non_bifurcating is set when no cycle is found
// or the distances fail to decay.
struct convergence_entry {
  double eps = 0.0;
  bool ok = false;
  std::string message;  // failure reason when !ok
  limit_cycle_report report;
};
struct convergence_report {
  std::vector<convergence_entry> entries;
  std::vector<double> decay_ratios;  // distance[i+1] / distance[i] over successes
  bool non_bifurcating = false;
};
convergence_report convergence_study(
    const std::function<velocity_field(double)>& field_family,
    const orbit_parameterization& orbit, double h_star,
    const std::vector<double>& eps_list, const integrator_config& cfg);

// Symmetric max-min point-to-segment distance between two polylines.
double hausdorff_distance(const std::vector<vecn>& a,
                          const std::vector<vecn>& b);

}  // namespace leafcycle
