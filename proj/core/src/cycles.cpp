// leafcycle: ODE integration, Poincare sections, displacement, and
// limit-cycle detection.
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "leafcycle/errors.hpp"

namespace leafcycle {

namespace {

// Dormand-Prince 5(4) tableau (first-same-as-last).
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
// 5th-order solution weights (row 7; also the FSAL abscissa).
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Embedded error weights (5th minus 4th order).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense-output weights for the 5th-order interpolant.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

// PI step-size controller (beta = 0.04).
constexpr double ctrl_beta = 0.04;
constexpr double ctrl_expo1 = 0.2 - ctrl_beta * 0.75;
constexpr double ctrl_safe = 0.9;
constexpr double ctrl_fac_min = 0.1;  // largest step shrink: 10x
constexpr double ctrl_fac_max = 5.0;  // largest step growth: 5x
constexpr long max_total_steps = 10000000;

double rms_scaled(const vecn& v, const vecn& sc) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double q = v[i] / sc[i];
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Hairer-style automatic initial step: match the scale of the state and of
// the first two derivative estimates, then cap by an explicit Euler probe.
double initial_step(const velocity_field& field, const vecn& y0,
                    const vecn& f0, double posneg, double span,
                    const integrator_config& cfg) {
  const std::size_t n = y0.size();
  vecn sc(n);
  for (std::size_t i = 0; i < n; ++i)
    sc[i] = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
  const double d0 = rms_scaled(y0, sc);
  const double d1n = rms_scaled(f0, sc);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * (d0 / d1n);
  h0 = std::min(h0, span);

  // Euler probe for the second-derivative scale.
  double d2 = 0.0;
  vecn y1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + posneg * h0 * f0[i];
  try {
    const vecn f1 = field.eval(y1);
    if (all_finite(f1)) {
      vecn df(n);
      for (std::size_t i = 0; i < n; ++i) df[i] = f1[i] - f0[i];
      d2 = rms_scaled(df, sc) / h0;
    }
  } catch (const std::exception&) {
    d2 = 0.0;  // probe left the field's domain; fall back to the h0 scale
  }

  const double der12 = std::max(d1n, d2);
  double h1;
  if (der12 <= 1e-15)
    h1 = std::max(1e-6, 1e-3 * h0);
  else
    h1 = std::pow(0.01 / der12, 0.2);

  double h = std::min({100.0 * h0, h1, span});
  if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
  return std::max(h, 1e-300);
}

// One-step driver holding the FSAL state and the PI controller memory.
class dopri5_stepper {
 public:
  dopri5_stepper(const velocity_field& field, const vecn& y0, double t0,
                 double t_end, const integrator_config& cfg)
      : field_(field), cfg_(cfg), t_(t0), y_(y0) {
    if (!all_finite(y0))
      throw nonfinite_error("integrate: non-finite initial state");
    posneg_ = (t_end >= t0) ? 1.0 : -1.0;
    k1_ = field_.eval(y_);
    if (!all_finite(k1_))
      throw nonfinite_error("integrate: vector field non-finite at start");
    const double span = std::abs(t_end - t0);
    h_ = posneg_ * initial_step(field_, y_, k1_, posneg_, std::max(span, 1e-12),
                                cfg_);
  }

  double t() const { return t_; }
  const vecn& y() const { return y_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  bool done(double t_limit) const {
    return (t_limit - t_) * posneg_ <=
           4.0 * std::numeric_limits<double>::epsilon() *
               std::max(1.0, std::abs(t_));
  }

  // Advances by one accepted step (never past t_limit) and fills `seg`.
  void advance(double t_limit, dense_segment& seg) {
    const std::size_t n = y_.size();
    const double uround = std::numeric_limits<double>::epsilon();
    vecn y2(n), y3(n), y4(n), y5(n), y6(n), ynew(n), err_vec(n);

    for (;;) {
      if (accepted_ + rejected_ >= max_total_steps)
        throw time_budget_error("integrate: step budget exhausted");
      if (0.1 * std::abs(h_) <= std::abs(t_) * uround)
        throw step_underflow_error("integrate: step size underflow at t = " +
                                   std::to_string(t_));
      if (cfg_.max_step > 0.0 && std::abs(h_) > cfg_.max_step)
        h_ = posneg_ * cfg_.max_step;
      // Do not step past the target; stretch-detect with a 1% slack so the
      // final step is not followed by a sliver.
      if ((t_ + 1.01 * h_ - t_limit) * posneg_ > 0.0) h_ = t_limit - t_;

      const double h = h_;
      for (std::size_t i = 0; i < n; ++i) y2[i] = y_[i] + h * a21 * k1_[i];
      const vecn k2 = field_.eval(y2);
      for (std::size_t i = 0; i < n; ++i)
        y3[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
      const vecn k3 = field_.eval(y3);
      for (std::size_t i = 0; i < n; ++i)
        y4[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
      const vecn k4 = field_.eval(y4);
      for (std::size_t i = 0; i < n; ++i)
        y5[i] = y_[i] +
                h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      const vecn k5 = field_.eval(y5);
      for (std::size_t i = 0; i < n; ++i)
        y6[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
      const vecn k6 = field_.eval(y6);
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3[i] + b4 * k4[i] +
                               b5 * k5[i] + b6 * k6[i]);
      const vecn k7 = field_.eval(ynew);

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        err_vec[i] = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
        const double sc =
            cfg_.abs_tol +
            cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(ynew[i]));
        const double q = err_vec[i] / sc;
        err += q * q;
      }
      err = std::sqrt(err / static_cast<double>(n));

      if (!std::isfinite(err) || !all_finite(ynew)) {
        // A stage left the field's numeric range; retry with a halved step.
        ++rejected_;
        h_ = 0.5 * h;
        if (std::abs(h_) < 1e-14 * std::max(1.0, std::abs(t_)))
          throw nonfinite_error(
              "integrate: vector field non-finite at t = " +
              std::to_string(t_));
        continue;
      }

      const double fac11 = std::pow(err, ctrl_expo1);
      if (err <= 1.0) {
        // Accept; PI growth limited by the previous error (beta term).
        double fac = fac11 / std::pow(facold_, ctrl_beta);
        fac = std::max(ctrl_fac_min, std::min(ctrl_fac_max, fac / ctrl_safe));
        double hnew = h / fac;
        facold_ = std::max(err, 1e-4);
        if (last_rejected_) hnew = posneg_ * std::min(std::abs(hnew), std::abs(h));
        last_rejected_ = false;

        seg.t0 = t_;
        seg.h = h;
        seg.rcont.assign(5, vecn(n));
        for (std::size_t i = 0; i < n; ++i) {
          const double ydiff = ynew[i] - y_[i];
          const double bspl = h * k1_[i] - ydiff;
          seg.rcont[0][i] = y_[i];
          seg.rcont[1][i] = ydiff;
          seg.rcont[2][i] = bspl;
          seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
          seg.rcont[4][i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] +
                                 d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }

        t_ += h;
        y_ = ynew;
        k1_ = k7;  // first-same-as-last
        h_ = hnew;
        ++accepted_;
        return;
      }
      // Reject: shrink from the raw error estimate alone.
      h_ = h / std::min(ctrl_fac_max, fac11 / ctrl_safe);
      last_rejected_ = true;
      ++rejected_;
    }
  }

 private:
  const velocity_field& field_;
  integrator_config cfg_;
  double t_;
  vecn y_;
  vecn k1_;
  double h_ = 0.0;
  double posneg_ = 1.0;
  double facold_ = 1e-4;
  bool last_rejected_ = false;
  long accepted_ = 0;
  long rejected_ = 0;
};

// Bisects a boolean predicate flip on one dense segment; returns the last
// time at which the predicate still holds.
double bisect_exit(const dense_segment& seg,
                   const std::function<bool(const vecn&)>& inside,
                   double t_in, double t_out) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (t_in + t_out);
    if (mid == t_in || mid == t_out) break;
    if (inside(seg.eval(mid)))
      t_in = mid;
    else
      t_out = mid;
    if (std::abs(t_out - t_in) <= 1e-13 * std::max(1.0, std::abs(t_out)))
      break;
  }
  return t_in;
}

}  // namespace

vecn dense_segment::eval(double t) const {
  const std::size_t n = rcont[0].size();
  vecn out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = eval_component(t, static_cast<int>(i));
  return out;
}

double dense_segment::eval_component(double t, int i) const {
  const double theta = (h != 0.0) ? (t - t0) / h : 0.0;
  const double theta1 = 1.0 - theta;
  return rcont[0][i] +
         theta * (rcont[1][i] +
                  theta1 * (rcont[2][i] +
                            theta * (rcont[3][i] + theta1 * rcont[4][i])));
}

void validate(const integrator_config& cfg) {
  if (!(cfg.rel_tol >= 1e-14 && cfg.rel_tol <= 1e-2))
    throw error("integrator_config: rel_tol must lie in [1e-14, 1e-2]");
  if (!(cfg.abs_tol > 0.0 && cfg.abs_tol <= 1e-2))
    throw error("integrator_config: abs_tol must lie in (0, 1e-2]");
  if (!(cfg.max_step >= 0.0) || !std::isfinite(cfg.max_step))
    throw error("integrator_config: max_step must be finite and >= 0");
  if (!(cfg.max_time > 0.0) || !std::isfinite(cfg.max_time))
    throw error("integrator_config: max_time must be finite and > 0");
}

vecn trajectory::at(double t) const {
  if (segments.empty()) return y_start;
  const double lo = std::min(t_start, t_final);
  const double hi = std::max(t_start, t_final);
  t = std::min(hi, std::max(lo, t));
  // Segments are contiguous in integration order; locate by sign-aware
  // binary search on t0.
  const double dir = (t_final >= t_start) ? 1.0 : -1.0;
  std::size_t a = 0, b = segments.size();
  while (b - a > 1) {
    const std::size_t mid = a + (b - a) / 2;
    if ((t - segments[mid].t0) * dir >= 0.0)
      a = mid;
    else
      b = mid;
  }
  return segments[a].eval(t);
}

trajectory integrate(const velocity_field& field, const vecn& x0, double t_end,
                     const integrator_config& cfg,
                     const std::function<bool(const vecn&)>& domain) {
  validate(cfg);
  trajectory traj;
  traj.t_start = 0.0;
  traj.y_start = x0;
  traj.t_final = 0.0;
  traj.y_final = x0;
  if (domain && !domain(x0))
    throw domain_exit_error("integrate: initial state outside the domain",
                            0.0);
  if (t_end == 0.0) return traj;

  dopri5_stepper stepper(field, x0, 0.0, t_end, cfg);
  dense_segment seg;
  while (!stepper.done(t_end)) {
    stepper.advance(t_end, seg);
    if (domain && !domain(stepper.y())) {
      const double t_exit =
          bisect_exit(seg, domain, seg.t0, seg.t0 + seg.h);
      traj.segments.push_back(seg);
      traj.t_final = t_exit;
      traj.y_final = seg.eval(t_exit);
      traj.steps_accepted = stepper.accepted();
      traj.steps_rejected = stepper.rejected();
      throw domain_exit_error("integrate: trajectory left the domain",
                              t_exit);
    }
    traj.segments.push_back(seg);
  }
  traj.t_final = stepper.t();
  traj.y_final = stepper.y();
  traj.steps_accepted = stepper.accepted();
  traj.steps_rejected = stepper.rejected();
  return traj;
}

namespace {

// Refines one bracketed section crossing. The bracket comes from dense
// output; the returned state is produced by re-integrating from the step
// start, then polished with Newton steps in time so the section residual,
// not the interpolant, sets the accuracy.
poincare_result refine_crossing(const velocity_field& field,
                                const section_spec& section,
                                const dense_segment& seg, double ta, double tb,
                                const integrator_config& cfg) {
  const auto g_dense = [&](double t) {
    return section.sigma.eval(seg.eval(t));
  };
  const double t_tol = 1e-13 * std::max(1.0, std::max(std::abs(ta), std::abs(tb)));
  double t_c = refine_root(g_dense, ta, tb, t_tol);

  // Re-integrate the sub-step from the segment start to t_c.
  vecn x = seg.rcont[0];
  if (t_c != seg.t0)
    x = integrate(field, seg.rcont[0], t_c - seg.t0, cfg).y_final;

  // Newton in time: dt = -sigma(x) / (grad sigma . f)(x).
  for (int it = 0; it < 8; ++it) {
    const double g = section.sigma.eval(x);
    if (std::abs(g) <= 1e-13) break;
    const vecn grad_sigma = section.sigma.grad(x);
    const vecn fx = field.eval(x);
    double rate = 0.0;
    for (std::size_t i = 0; i < grad_sigma.size(); ++i)
      rate += grad_sigma[i] * fx[i];
    if (rate == 0.0 || !std::isfinite(rate)) break;
    double dt = -g / rate;
    const double cap = std::abs(seg.h);
    dt = std::max(-cap, std::min(cap, dt));
    if (std::abs(dt) <= 1e-15 * std::max(1.0, std::abs(t_c))) break;
    x = integrate(field, x, dt, cfg).y_final;
    t_c += dt;
  }
  return poincare_result{x, t_c};
}

}  // namespace

poincare_result poincare_return(const velocity_field& field,
                                const section_spec& section, const vecn& x0,
                                const integrator_config& cfg,
                                const std::function<bool(const vecn&)>& domain) {
  validate(cfg);
  if (section.sigma.arity != static_cast<int>(x0.size()))
    throw error("poincare_return: section arity mismatch");
  if (domain && !domain(x0))
    throw domain_exit_error("poincare_return: start outside the domain", 0.0);

  constexpr double arm_eps = 1e-9;
  constexpr int samples_per_step = 9;  // endpoints plus 8 interior points

  dopri5_stepper stepper(field, x0, 0.0, cfg.max_time, cfg);
  dense_segment seg;
  bool armed = std::abs(section.sigma.eval(x0)) >= arm_eps;

  while (!stepper.done(cfg.max_time)) {
    stepper.advance(cfg.max_time, seg);

    // Domain exit ends the search before any crossing on this segment is
    // accepted beyond the exit time.
    double t_stop = seg.t0 + seg.h;
    bool exits = false;
    if (domain && !domain(stepper.y())) {
      t_stop = bisect_exit(seg, domain, seg.t0, seg.t0 + seg.h);
      exits = true;
    }

    double t_prev = seg.t0;
    double g_prev = section.sigma.eval(seg.eval(t_prev));
    for (int j = 1; j <= samples_per_step; ++j) {
      const double t_j =
          seg.t0 + seg.h * (static_cast<double>(j) / samples_per_step);
      if ((t_j - t_stop) * (seg.h > 0 ? 1.0 : -1.0) > 0.0) break;
      const double g_j = section.sigma.eval(seg.eval(t_j));
      if (!armed) {
        if (std::abs(g_j) >= arm_eps) armed = true;
      } else if (g_prev * g_j < 0.0 ||
                 (g_j == 0.0 && g_prev != 0.0)) {
        const bool increasing = g_j > g_prev;
        if (section.direction == 0 ||
            (section.direction > 0) == increasing) {
          poincare_result res =
              refine_crossing(field, section, seg, t_prev, t_j, cfg);
          if (!section.admissible || section.admissible(res.state))
            return res;
        }
      }
      t_prev = t_j;
      g_prev = g_j;
    }

    if (exits)
      throw domain_exit_error(
          "poincare_return: trajectory left the domain before returning",
          t_stop);
  }
  throw no_return_error(
      "poincare_return: no admissible section crossing within max_time = " +
      std::to_string(cfg.max_time));
}

int orbit_orientation(const velocity_field& field,
                      const orbit_parameterization& orbit, double h) {
  if (!orbit.chart)
    throw error("orbit_orientation: orbit parameterization has no chart");
  const vecn x0 = orbit_ambient_point(orbit, h, 0.0);
  const vecn fx = field.eval(x0);
  const std::vector<vecn> jac = chart_jacobian(*orbit.chart, x0);
  // Chart-plane components of the pushforward.
  double v1 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    v1 += jac[0][i] * fx[i];
    v2 += jac[1][i] * fx[i];
  }
  // Counterclockwise tangent at theta = 0.
  const double dtheta = 1e-6;
  std::array<double, 2> tan_ccw{};
  if (orbit.curve_tangent) {
    tan_ccw = orbit.curve_tangent(h, 0.0);
  } else {
    const auto p = orbit.curve(h, dtheta);
    const auto m = orbit.curve(h, -dtheta);
    tan_ccw = {(p[0] - m[0]) / (2 * dtheta), (p[1] - m[1]) / (2 * dtheta)};
  }
  const double dot = v1 * tan_ccw[0] + v2 * tan_ccw[1];
  if (dot == 0.0 || !std::isfinite(dot))
    throw error("orbit_orientation: flow tangent to the section curve");
  return dot > 0.0 ? 1 : -1;
}

displacement_result displacement(const velocity_field& field,
                                 const orbit_parameterization& orbit, double h,
                                 const integrator_config& cfg) {
  if (!orbit.chart)
    throw error("displacement: orbit parameterization has no chart");
  const darboux_chart& chart = *orbit.chart;
  const vecn x0 = orbit_ambient_point(orbit, h, 0.0);

  // Crossing direction: the sign of d/dt Phi_2 along the flow at the start.
  const vecn grad_sigma = chart.phi2.grad(x0);
  const vecn fx = field.eval(x0);
  double rate = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) rate += grad_sigma[i] * fx[i];
  if (rate == 0.0 || !std::isfinite(rate))
    throw error("displacement: flow tangent to the section at the start");

  section_spec section;
  section.sigma = chart.phi2;
  section.direction = rate > 0.0 ? 1 : -1;
  section.admissible = [&chart](const vecn& x) {
    return chart.phi1.eval(x) > 0.0;
  };

  // Keep steps short enough that the per-step section sampling cannot skip
  // a crossing of the (order-one period) return loop.
  integrator_config run_cfg = cfg;
  run_cfg.max_step =
      (cfg.max_step > 0.0) ? std::min(cfg.max_step, 0.5) : 0.5;

  const auto domain = [&chart](const vecn& x) {
    return chart.source_contains(x);
  };
  const poincare_result ret =
      poincare_return(field, section, x0, run_cfg, domain);

  displacement_result out;
  // The chart Hamiltonian at the return equals the ambient Hamiltonian
  // there (H~ o Phi = H).
  out.h_return = chart.sys.hamiltonian.eval(ret.state);
  out.delta = out.h_return - h;
  out.t_return = ret.t_return;
  out.state = ret.state;
  return out;
}

limit_cycle_report find_limit_cycle(const velocity_field& field,
                                    const orbit_parameterization& orbit,
                                    double h_star, double eps,
                                    const integrator_config& cfg,
                                    double h_guess) {
  if (!orbit.chart)
    throw error("find_limit_cycle: orbit parameterization has no chart");
  if (std::isnan(h_guess)) h_guess = h_star;

  const double span = orbit.h_max - orbit.h_min;
  const double lo = orbit.h_min + 1e-6 * span;
  const double hi = orbit.h_max - 1e-6 * span;
  const auto clamp_h = [&](double prev, double cand) {
    if (cand < lo) return 0.5 * (prev + lo);
    if (cand > hi) return 0.5 * (prev + hi);
    return cand;
  };

  double h0 = clamp_h(h_guess, h_guess);
  double offset = 1e-3 * span;
  if (h0 + offset > hi) offset = -offset;
  double h1 = clamp_h(h0, h0 + offset);

  double delta0 = displacement(field, orbit, h0, cfg).delta;
  double delta1 = displacement(field, orbit, h1, cfg).delta;

  const double flat_floor = 1e-10 * std::max(1.0, std::abs(h0));
  if (std::abs(delta0) < flat_floor && std::abs(delta1) < flat_floor)
    throw not_isolated_error(
        "find_limit_cycle: displacement is flat near the seed; no isolated "
        "fixed point");

  double h_fix = h1;
  bool converged = false;
  for (int it = 0; it < 40; ++it) {
    if (std::abs(delta1) <= 1e-12) {
      h_fix = h1;
      converged = true;
      break;
    }
    const double denom = delta1 - delta0;
    if (denom == 0.0)
      throw no_convergence_error(
          "find_limit_cycle: stalled secant (flat displacement)");
    double h2 = h1 - delta1 * (h1 - h0) / denom;
    h2 = clamp_h(h1, h2);
    if (std::abs(h2 - h1) <= 1e-9) {
      h_fix = h2;
      converged = true;
      break;
    }
    h0 = h1;
    delta0 = delta1;
    h1 = h2;
    delta1 = displacement(field, orbit, h1, cfg).delta;
  }
  if (!converged)
    throw no_convergence_error(
        "find_limit_cycle: secant iteration did not converge in 40 steps");

  const displacement_result fixed = displacement(field, orbit, h_fix, cfg);

  // Return-map slope d(eta)/dh ~ 1 + d(delta)/dh by central differences.
  double dh = 1e-4;
  dh = std::min({dh, 0.5 * (h_fix - lo), 0.5 * (hi - h_fix)});
  const double dplus = displacement(field, orbit, h_fix + dh, cfg).delta;
  const double dminus = displacement(field, orbit, h_fix - dh, cfg).delta;
  const double slope = 1.0 + (dplus - dminus) / (2.0 * dh);

  // Closed ambient polyline of the cycle over one period. The end state of
  // the one-period integration must land back on the start point; a gap
  // beyond 1e-6 means the return was not actually periodic.
  constexpr int cycle_samples = 512;
  const vecn x0 = orbit_ambient_point(orbit, h_fix, 0.0);
  const trajectory traj = integrate(field, x0, fixed.t_return, cfg);
  double closure_gap = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i)
    closure_gap = std::max(closure_gap, std::abs(traj.y_final[i] - x0[i]));
  if (!(closure_gap <= 1e-6))
    throw no_convergence_error(
        "find_limit_cycle: one-period trajectory misses its start point by " +
        std::to_string(closure_gap));
  std::vector<vecn> cycle;
  cycle.reserve(cycle_samples + 1);
  for (int j = 0; j < cycle_samples; ++j)
    cycle.push_back(
        traj.at(fixed.t_return * static_cast<double>(j) / cycle_samples));
  cycle.push_back(cycle.front());

  limit_cycle_report report;
  report.eps = eps;
  report.h_star_source = h_star;
  report.h_eps = h_fix;
  report.period = fixed.t_return;
  report.return_slope = slope;
  report.cycle_points = std::move(cycle);
  report.hausdorff_to_source = hausdorff_distance(
      report.cycle_points, orbit_ambient_polyline(orbit, h_star, cycle_samples));
  return report;
}

convergence_report convergence_study(
    const std::function<velocity_field(double)>& field_family,
    const orbit_parameterization& orbit, double h_star,
    const std::vector<double>& eps_list, const integrator_config& cfg) {
  if (eps_list.empty())
    throw error("convergence_study: empty eps list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0))
      throw error("convergence_study: eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw error("convergence_study: eps values must be strictly decreasing");
  }

  convergence_report rep;
  double h_guess = h_star;
  std::vector<double> distances;
  for (const double eps : eps_list) {
    convergence_entry entry;
    entry.eps = eps;
    try {
      const velocity_field field = field_family(eps);
      entry.report =
          find_limit_cycle(field, orbit, h_star, eps, cfg, h_guess);
      entry.ok = true;
      h_guess = entry.report.h_eps;  // warm start for the next eps
      distances.push_back(entry.report.hausdorff_to_source);
    } catch (const std::exception& ex) {
      entry.ok = false;
      entry.message = ex.what();
    }
    rep.entries.push_back(std::move(entry));
  }

  for (std::size_t i = 0; i + 1 < distances.size(); ++i)
    rep.decay_ratios.push_back(
        distances[i] > 0.0 ? distances[i + 1] / distances[i]
                           : std::numeric_limits<double>::infinity());

  rep.non_bifurcating =
      distances.empty() || distances.back() >= 0.9 * distances.front();
  return rep;
}

namespace {

double point_segment_distance(const vecn& p, const vecn& a, const vecn& b) {
  const std::size_t n = p.size();
  double ab2 = 0.0, ap_ab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - a[i];
    ab2 += d * d;
    ap_ab += (p[i] - a[i]) * d;
  }
  const double s = (ab2 > 0.0) ? std::min(1.0, std::max(0.0, ap_ab / ab2)) : 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = p[i] - (a[i] + s * (b[i] - a[i]));
    acc += d * d;
  }
  return std::sqrt(acc);
}

double directed_hausdorff(const std::vector<vecn>& from,
                          const std::vector<vecn>& to) {
  double worst = 0.0;
  for (const vecn& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < to.size(); ++j) {
      best = std::min(best, point_segment_distance(p, to[j], to[j + 1]));
      if (best == 0.0) break;
    }
    if (to.size() == 1) best = point_segment_distance(p, to[0], to[0]);
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const std::vector<vecn>& a,
                          const std::vector<vecn>& b) {
  if (a.empty() || b.empty())
    throw error("hausdorff_distance: empty polyline");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace leafcycle
