// leafcycle: Darboux charts (implementation).
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/darboux.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace leafcycle {

void validate(const darboux_chart& chart) {
  validate(chart.sys);
  if (chart.phi1.arity != chart.sys.n || chart.phi2.arity != chart.sys.n)
    throw std::invalid_argument("darboux_chart: phi arity mismatch");
  if (!chart.phi1.eval || !chart.phi2.eval)
    throw std::invalid_argument("darboux_chart: missing phi eval");
}

vecn forward(const darboux_chart& chart, const vecn& x) {
  const int n = chart.sys.n;
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("forward: point arity mismatch");
  if (!chart.source_contains(x))
    throw outside_domain_error("forward: point outside chart source domain");
  vecn y(n);
  y[0] = chart.phi1.eval(x);
  y[1] = chart.phi2.eval(x);
  for (int i = 0; i < n - 2; ++i) y[i + 2] = chart.sys.casimirs[i].eval(x);
  if (!all_finite(y)) throw nonfinite_error("forward: non-finite chart value");
  return y;
}

std::vector<vecn> chart_jacobian(const darboux_chart& chart, const vecn& x) {
  const int n = chart.sys.n;
  std::vector<vecn> rows;
  rows.reserve(n);
  rows.push_back(gradient(chart.phi1, x));
  rows.push_back(gradient(chart.phi2, x));
  for (int i = 0; i < n - 2; ++i)
    rows.push_back(gradient(chart.sys.casimirs[i], x));
  return rows;
}

double chart_jacobian_determinant(const darboux_chart& chart, const vecn& x) {
  return determinant(chart_jacobian(chart, x));
}

vecn inverse(const darboux_chart& chart, const vecn& y) {
  if (!chart.analytic_inverse)
    throw std::invalid_argument(
        "inverse: no analytic inverse; supply a Newton guess");
  if (!chart.image_contains(y))
    throw outside_domain_error("inverse: point outside chart image W'");
  vecn x = chart.analytic_inverse(y);
  if (!all_finite(x)) throw nonfinite_error("inverse: non-finite inverse value");
  return x;
}

vecn inverse(const darboux_chart& chart, const vecn& y, const vecn& guess) {
  if (chart.analytic_inverse) return inverse(chart, y);
  const int n = chart.sys.n;
  if (!chart.image_contains(y))
    throw outside_domain_error("inverse: point outside chart image W'");
  if (static_cast<int>(guess.size()) != n)
    throw std::invalid_argument("inverse: guess arity mismatch");
  // Damped Newton on F(x) = forward(x) - y.
  vecn x = guess;
  auto residual_norm = [&](const vecn& xx) {
    const vecn f = forward(chart, xx);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (f[i] - y[i]) * (f[i] - y[i]);
    return std::sqrt(s);
  };
  double res = residual_norm(x);
  for (int iter = 0; iter < 50; ++iter) {
    if (res <= 1e-12) return x;
    const vecn f = forward(chart, x);
    vecn rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = y[i] - f[i];
    vecn step;
    try {
      step = linear_solve(chart_jacobian(chart, x), rhs);
    } catch (const singular_matrix_error&) {
      throw singular_jacobian_error(
          "inverse: chart Jacobian singular during Newton iteration");
    }
    // Halve the step until the residual decreases.
    double lambda = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 40; ++halvings) {
      vecn trial(n);
      for (int i = 0; i < n; ++i) trial[i] = x[i] + lambda * step[i];
      double trial_res;
      try {
        trial_res = residual_norm(trial);
      } catch (const error&) {
        lambda *= 0.5;  // stepped outside the domain; shrink
        continue;
      }
      if (trial_res < res) {
        x = trial;
        res = trial_res;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved)
      throw no_convergence_error("inverse: damped Newton stalled");
  }
  if (res <= 1e-12) return x;
  throw no_convergence_error("inverse: Newton did not reach tolerance in 50 iterations");
}

double nu_phi_at_source(const darboux_chart& chart, const vecn& x) {
  const double nu = chart.sys.rescale.eval(x);
  const double jac = chart_jacobian_determinant(chart, x);
  const double v = nu * jac;
  if (!std::isfinite(v)) throw nonfinite_error("nu_phi: non-finite value");
  return v;
}

double nu_phi(const darboux_chart& chart, const vecn& y) {
  // Newton path requires a guess; charts without an analytic inverse should
  // use nu_phi_at_source with a known preimage instead.
  const vecn x = inverse(chart, y);
  return nu_phi_at_source(chart, x);
}

vecn pushforward_field(const darboux_chart& chart, const velocity_field& field,
                       const vecn& y) {
  const vecn x = inverse(chart, y);
  const std::vector<vecn> jac = chart_jacobian(chart, x);
  const vecn v = field.eval(x);
  const int n = chart.sys.n;
  vecn out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += jac[i][j] * v[j];
  if (!all_finite(out))
    throw nonfinite_error("pushforward_field: non-finite value");
  return out;
}

double chart_hamiltonian(const darboux_chart& chart, const vecn& y) {
  const vecn x = inverse(chart, y);
  const double h = chart.sys.hamiltonian.eval(x);
  if (!std::isfinite(h))
    throw nonfinite_error("chart_hamiltonian: non-finite value");
  return h;
}

namespace {

// 4th-order central difference of H~ = H o Phi^{-1} along chart axis `axis`
// (0 or 1), with the remaining coordinates frozen.
double chart_hamiltonian_partial(const darboux_chart& chart, const vecn& y,
                                 int axis) {
  static const double step0 = std::cbrt(std::numeric_limits<double>::epsilon());
  double h = step0 * std::max(1.0, std::abs(y[axis]));
  volatile double tmp = y[axis] + h;
  h = tmp - y[axis];
  vecn yy = y;
  yy[axis] = y[axis] + 2.0 * h;
  const double fp2 = chart_hamiltonian(chart, yy);
  yy[axis] = y[axis] + h;
  const double fp1 = chart_hamiltonian(chart, yy);
  yy[axis] = y[axis] - h;
  const double fm1 = chart_hamiltonian(chart, yy);
  yy[axis] = y[axis] - 2.0 * h;
  const double fm2 = chart_hamiltonian(chart, yy);
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

}  // namespace

darboux_report darboux_residual(const darboux_chart& chart,
                                const std::vector<vecn>& points_in_image) {
  const velocity_field x_field = realized_field(chart.sys);
  const int n = chart.sys.n;
  darboux_report rep;
  for (const vecn& y : points_in_image) {
    const vecn push = pushforward_field(chart, x_field, y);
    const double nphi = nu_phi(chart, y);
    const double dh_dy1 = chart_hamiltonian_partial(chart, y, 0);
    const double dh_dy2 = chart_hamiltonian_partial(chart, y, 1);
    vecn expected(n, 0.0);
    expected[0] = nphi * dh_dy2;
    expected[1] = -nphi * dh_dy1;
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      err = std::max(err, std::abs(push[i] - expected[i]));
    rep.max_residual = std::max(rep.max_residual, err);
  }
  return rep;
}

chart_audit_report chart_audit(const darboux_chart& chart,
                               const std::vector<vecn>& points_in_image) {
  chart_audit_report rep;
  rep.min_abs_jacobian = std::numeric_limits<double>::infinity();
  rep.min_abs_nu_phi = std::numeric_limits<double>::infinity();
  int sign_seen = 0;
  for (const vecn& y : points_in_image) {
    const vecn x = inverse(chart, y);
    const vecn y_back = forward(chart, x);
    double rt = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      rt = std::max(rt, std::abs(y_back[i] - y[i]));
    rep.max_roundtrip_error = std::max(rep.max_roundtrip_error, rt);
    const double jac = chart_jacobian_determinant(chart, x);
    rep.min_abs_jacobian = std::min(rep.min_abs_jacobian, std::abs(jac));
    const double nphi = chart.sys.rescale.eval(x) * jac;
    rep.min_abs_nu_phi = std::min(rep.min_abs_nu_phi, std::abs(nphi));
    const int s = (nphi > 0.0) ? 1 : (nphi < 0.0 ? -1 : 0);
    if (s == 0) rep.nu_phi_sign_constant = false;
    if (sign_seen == 0) sign_seen = s;
    else if (s != 0 && s != sign_seen) rep.nu_phi_sign_constant = false;
  }
  return rep;
}

}  // namespace leafcycle
