// leafcycle: the hyperelliptic verification family.
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/jacobi.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "leafcycle/errors.hpp"

namespace leafcycle {

void validate(const hyperelliptic_params& params) {
  if (params.n < 3)
    throw std::invalid_argument("hyperelliptic_params: n must be >= 3");
  if (static_cast<int>(params.k.size()) != params.n - 2)
    throw std::invalid_argument(
        "hyperelliptic_params: k must have n - 2 entries");
  for (double kj : params.k)
    if (!std::isfinite(kj))
      throw std::invalid_argument("hyperelliptic_params: non-finite modulus");
}

void validate(const hyperelliptic_params& params, const sign_tuple& signs) {
  validate(params);
  if (static_cast<int>(signs.size()) != params.n - 2)
    throw std::invalid_argument("sign_tuple: must have n - 2 entries");
  for (int s : signs)
    if (s != 1 && s != -1)
      throw std::invalid_argument("sign_tuple: entries must be +1 or -1");
}

integrable_system build_system(const hyperelliptic_params& params) {
  validate(params);
  const int n = params.n;
  const vecn k = params.k;

  integrable_system sys;
  sys.n = n;

  sys.hamiltonian.arity = n;
  sys.hamiltonian.eval = [](const vecn& x) {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]);
  };
  sys.hamiltonian.grad = [n](const vecn& x) {
    vecn g(n, 0.0);
    g[0] = x[0];
    g[1] = x[1];
    return g;
  };

  for (int j = 0; j < n - 2; ++j) {
    const double kj2 = k[j] * k[j];
    scalar_field cj;
    cj.arity = n;
    cj.eval = [kj2, j](const vecn& x) {
      return 0.5 * (kj2 * x[0] * x[0] + x[j + 2] * x[j + 2]);
    };
    cj.grad = [kj2, j, n](const vecn& x) {
      vecn g(n, 0.0);
      g[0] = kj2 * x[0];
      g[j + 2] = x[j + 2];
      return g;
    };
    sys.casimirs.push_back(std::move(cj));
  }

  sys.rescale = constant_field(n, 1.0);
  sys.in_domain = {};  // all of R^n
  return sys;
}

darboux_chart build_chart(const hyperelliptic_params& params,
                          const sign_tuple& signs) {
  validate(params, signs);
  const int n = params.n;
  const vecn k = params.k;

  darboux_chart chart;
  chart.sys = build_system(params);
  chart.phi1 = coordinate_field(n, 0);
  chart.phi2 = coordinate_field(n, 1);

  chart.analytic_inverse = [n, k, signs](const vecn& y) {
    vecn x(n);
    x[0] = y[0];
    x[1] = y[1];
    for (int j = 0; j < n - 2; ++j) {
      const double rad = 2.0 * y[j + 2] - k[j] * k[j] * y[0] * y[0];
      x[j + 2] = static_cast<double>(signs[j]) * std::sqrt(rad);
    }
    return x;
  };
  chart.image_domain = [n, k](const vecn& y) {
    for (int j = 0; j < n - 2; ++j)
      if (!(k[j] * k[j] * y[0] * y[0] < 2.0 * y[j + 2])) return false;
    return true;
  };
  chart.source_domain = [n, signs](const vecn& x) {
    for (int j = 0; j < n - 2; ++j)
      if (!(static_cast<double>(signs[j]) * x[j + 2] > 0.0)) return false;
    return true;
  };
  return chart;
}

double rho(const hyperelliptic_params& params, const leaf_coordinates& leaf) {
  validate(params);
  if (static_cast<int>(leaf.c.size()) != params.n - 2)
    throw std::invalid_argument("rho: leaf must have n - 2 Casimir values");
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < params.n - 2; ++j) {
    if (!(leaf.c[j] > 0.0))
      throw non_positive_leaf_error(
          "rho: leaf requires all c_i > 0 (got c_" + std::to_string(j + 1) +
          " = " + std::to_string(leaf.c[j]) + ")");
    if (params.k[j] != 0.0)
      best = std::min(best,
                      std::sqrt(2.0 * leaf.c[j]) / std::abs(params.k[j]));
  }
  return best;
}

orbit_parameterization orbit_family(const hyperelliptic_params& params,
                                    const sign_tuple& signs,
                                    const leaf_coordinates& leaf) {
  validate(params, signs);
  const double disc_radius = rho(params, leaf);

  orbit_parameterization orbit;
  orbit.curve = [](double h, double theta) {
    const double r = std::sqrt(2.0 * h);
    return std::array<double, 2>{r * std::cos(theta), r * std::sin(theta)};
  };
  orbit.curve_tangent = [](double h, double theta) {
    const double r = std::sqrt(2.0 * h);
    return std::array<double, 2>{-r * std::sin(theta), r * std::cos(theta)};
  };
  orbit.h_min = 0.0;
  orbit.h_max = 0.5 * disc_radius * disc_radius;
  orbit.leaf = leaf;
  orbit.chart = build_chart(params, signs);
  return orbit;
}

vecn jacobi_functions(const hyperelliptic_params& params, double t,
                      const integrator_config& cfg) {
  validate(params);
  vecn x0(params.n, 1.0);
  x0[0] = 0.0;
  if (t == 0.0) return x0;
  const velocity_field field = realized_field(build_system(params));
  return integrate(field, x0, t, cfg).y_final;
}

double monotonic_branch_end(const hyperelliptic_params& params,
                            const integrator_config& cfg) {
  validate(params);
  vecn x0(params.n, 1.0);
  x0[0] = 0.0;
  const velocity_field field = realized_field(build_system(params));
  const trajectory traj = integrate(field, x0, cfg.max_time, cfg);

  // Scan each dense segment for the first sign change among x_2, ..., x_n.
  constexpr int scan = 16;
  for (const dense_segment& seg : traj.segments) {
    double best = std::numeric_limits<double>::infinity();
    for (int comp = 1; comp < params.n; ++comp) {
      double t_prev = seg.t0;
      double v_prev = seg.rcont[0][comp];
      for (int j = 1; j <= scan; ++j) {
        const double t_j = seg.t0 + seg.h * (static_cast<double>(j) / scan);
        const double v_j = seg.eval_component(t_j, comp);
        if (v_prev * v_j < 0.0 || (v_j == 0.0 && v_prev != 0.0)) {
          // Only transversal crossings count. In the degenerate regime
          // (moduli at 1) the component decays exponentially toward zero
          // and integrator round-off makes it chatter across zero with a
          // slope at the noise floor; such chatter is asymptotic approach,
          // not a branch end.
          const double slope =
              std::abs(v_j - v_prev) / (seg.h / static_cast<double>(scan));
          if (slope > 1e-6) {
            const auto g = [&seg, comp](double tt) {
              return seg.eval_component(tt, comp);
            };
            best = std::min(best,
                            refine_root(g, t_prev, t_j,
                                        1e-13 * std::max(1.0, std::abs(t_j))));
            break;
          }
        }
        t_prev = t_j;
        v_prev = v_j;
      }
    }
    if (std::isfinite(best)) return best;
  }
  return std::numeric_limits<double>::infinity();
}

inversion_report inversion_check(const hyperelliptic_params& params, double t,
                                 const integrator_config& cfg) {
  return inversion_check(params, t, cfg, monotonic_branch_end(params, cfg));
}

inversion_report inversion_check(const hyperelliptic_params& params, double t,
                                 const integrator_config& cfg,
                                 double branch_end) {
  validate(params);
  const double t_end = branch_end;
  if (!(std::abs(t) < t_end))
    throw outside_monotonic_branch_error(
        "inversion_check: |t| = " + std::to_string(std::abs(t)) +
        " reaches the branch end t_max = " + std::to_string(t_end));

  inversion_report rep;
  rep.sn = jacobi_functions(params, t, cfg)[0];

  // The integrand is singular only at |u| = 1 or |k_i u| = 1, both outside
  // the monotonic branch.
  const double s = rep.sn;
  if (!(1.0 - s * s > 0.0))
    throw outside_monotonic_branch_error(
        "inversion_check: sn(t) reached the integrand singularity");
  for (double kj : params.k)
    if (!(1.0 - kj * kj * s * s > 0.0))
      throw outside_monotonic_branch_error(
          "inversion_check: sn(t) reached the integrand singularity");

  const vecn k = params.k;
  const auto integrand = [&k](double u) {
    double q = 1.0 - u * u;
    for (double kj : k) q *= 1.0 - kj * kj * u * u;
    return 1.0 / std::sqrt(q);
  };
  double integral = 0.0;
  if (s > 0.0)
    integral = adaptive_gauss_legendre(integrand, 0.0, s, 1e-12);
  else if (s < 0.0)
    integral = -adaptive_gauss_legendre(integrand, s, 0.0, 1e-12);
  rep.integral = integral;
  rep.residual = std::abs(integral - t);
  return rep;
}

}  // namespace leafcycle
