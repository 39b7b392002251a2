// leafcycle: geometric perturbation construction (implementation).
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/perturb.hpp"

#include <cmath>
#include <stdexcept>

namespace leafcycle {

polynomial_perturbation make_polynomial_perturbation(int m) {
  if (m < 1)
    throw std::invalid_argument("polynomial_perturbation: degree must be >= 1");
  polynomial_perturbation pp;
  pp.m = m;
  pp.r.assign(m + 1, std::vector<std::function<double(const vecn&)>>(m + 1));
  pp.s.assign(m + 1, std::vector<std::function<double(const vecn&)>>(m + 1));
  return pp;
}

std::pair<scalar_field, scalar_field> polynomial_fields(
    const polynomial_perturbation& pp, const leaf_coordinates& leaf,
    int arity) {
  // Freeze the coefficient tables at the leaf.
  const int m = pp.m;
  std::vector<std::vector<double>> rc(m + 1, std::vector<double>(m + 1, 0.0));
  std::vector<std::vector<double>> sc(m + 1, std::vector<double>(m + 1, 0.0));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) {
      if (i < static_cast<int>(pp.r.size()) &&
          j < static_cast<int>(pp.r[i].size()) && pp.r[i][j])
        rc[i][j] = pp.r[i][j](leaf.c);
      if (i < static_cast<int>(pp.s.size()) &&
          j < static_cast<int>(pp.s[i].size()) && pp.s[i][j])
        sc[i][j] = pp.s[i][j](leaf.c);
    }
  auto make_eval = [m, arity](std::vector<std::vector<double>> coef) {
    scalar_field f;
    f.arity = arity;
    f.eval = [m, coef](const vecn& y) {
      // Horner in y_1 with inner Horner in y_2.
      double total = 0.0;
      for (int i = m; i >= 0; --i) {
        double inner = 0.0;
        for (int j = m - i; j >= 0; --j) inner = inner * y[1] + coef[i][j];
        total = total * y[0] + inner;
      }
      return total;
    };
    return f;
  };
  return {make_eval(std::move(rc)), make_eval(std::move(sc))};
}

namespace {

// Chart-coordinate image of x computed directly from the component fields
// (no source-domain gate: the perturbation formulas are well defined
// wherever the chart functions are).
vecn chart_point(const darboux_chart& chart, const vecn& x) {
  const int n = chart.sys.n;
  vecn y(n);
  y[0] = chart.phi1.eval(x);
  y[1] = chart.phi2.eval(x);
  for (int i = 0; i < n - 2; ++i) y[i + 2] = chart.sys.casimirs[i].eval(x);
  return y;
}

// Right-hand side of the defining gradient system at x.
vecn perturbation_rhs(const darboux_chart& chart, const scalar_field& f1,
                      const scalar_field& f2,
                      const std::vector<std::vector<scalar_field>>* r,
                      const vecn* leaf_c, const vecn& x) {
  const int n = chart.sys.n;
  const vecn y = chart_point(chart, x);
  const double nphi = nu_phi_at_source(chart, x);
  vecn b(n, 0.0);
  b[0] = nphi * f1.eval(y);
  b[1] = nphi * f2.eval(y);
  if (r != nullptr && !r->empty()) {
    for (int i = 0; i < n - 2; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n - 2; ++j) {
        const scalar_field& rij = (*r)[i][j];
        if (!rij.eval) continue;
        const double cj = chart.sys.casimirs[j].eval(x);
        acc += (cj - (*leaf_c)[j]) * rij.eval(y);
      }
      b[i + 2] = acc;
    }
  }
  if (!all_finite(b))
    throw nonfinite_error("perturbation: non-finite right-hand side");
  return b;
}

vecn solve_at(const darboux_chart& chart, const vecn& b, const vecn& x) {
  try {
    return linear_solve(chart_jacobian(chart, x), b);
  } catch (const singular_matrix_error&) {
    throw singular_jacobian_error(
        "perturbation: dependent gradients at evaluation point");
  }
}

// Cramer-type expansion of the same solution: with M the gradient matrix
// (rows grad Phi_1, grad Phi_2, grad C_1, ..., grad C_{n-2}),
//   A = (1/det M) * sum_{row j=1..n} (-1)^(n-j) b_j * Gcross(rows of M
//                                                           without row j).
vecn cross_expansion_at(const darboux_chart& chart, const vecn& b,
                        const vecn& x) {
  const int n = chart.sys.n;
  const std::vector<vecn> rows = chart_jacobian(chart, x);
  const double det = determinant(rows);
  if (det == 0.0)
    throw singular_jacobian_error(
        "perturbation: dependent gradients at evaluation point");
  vecn a(n, 0.0);
  std::vector<vecn> sub;
  sub.reserve(n - 1);
  for (int j = 1; j <= n; ++j) {
    if (b[j - 1] == 0.0) continue;
    sub.clear();
    for (int rr = 0; rr < n; ++rr)
      if (rr != j - 1) sub.push_back(rows[rr]);
    const vecn theta = generalized_cross(sub);
    const double sgn = (((n - j) % 2) == 0) ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) a[i] += sgn * b[j - 1] * theta[i];
  }
  for (int i = 0; i < n; ++i) a[i] /= det;
  return a;
}

void check_spec_arity(const darboux_chart& chart, const scalar_field& f1,
                      const scalar_field& f2) {
  if (f1.arity != chart.sys.n || f2.arity != chart.sys.n)
    throw std::invalid_argument("perturbation: field arity mismatch");
}

}  // namespace

velocity_field leaf_fixed_field(const darboux_chart& chart,
                                const leaf_perturbation& spec) {
  check_spec_arity(chart, spec.p1, spec.p2);
  if (!spec.r.empty() &&
      (static_cast<int>(spec.r.size()) != chart.sys.n - 2 ||
       static_cast<int>(spec.r[0].size()) != chart.sys.n - 2))
    throw std::invalid_argument("leaf_fixed_field: R must be (n-2) x (n-2)");
  if (static_cast<int>(spec.leaf.c.size()) != chart.sys.n - 2)
    throw std::invalid_argument("leaf_fixed_field: leaf arity mismatch");
  velocity_field a;
  a.arity = chart.sys.n;
  a.eval = [chart, spec](const vecn& x) {
    const vecn b =
        perturbation_rhs(chart, spec.p1, spec.p2, &spec.r, &spec.leaf.c, x);
    return solve_at(chart, b, x);
  };
  return a;
}

velocity_field foliated_field(const darboux_chart& chart,
                              const foliated_perturbation& spec) {
  check_spec_arity(chart, spec.q1, spec.q2);
  velocity_field a;
  a.arity = chart.sys.n;
  a.eval = [chart, spec](const vecn& x) {
    const vecn b =
        perturbation_rhs(chart, spec.q1, spec.q2, nullptr, nullptr, x);
    return solve_at(chart, b, x);
  };
  return a;
}

velocity_field leaf_fixed_field_cross(const darboux_chart& chart,
                                      const leaf_perturbation& spec) {
  check_spec_arity(chart, spec.p1, spec.p2);
  velocity_field a;
  a.arity = chart.sys.n;
  a.eval = [chart, spec](const vecn& x) {
    const vecn b =
        perturbation_rhs(chart, spec.p1, spec.p2, &spec.r, &spec.leaf.c, x);
    return cross_expansion_at(chart, b, x);
  };
  return a;
}

velocity_field foliated_field_cross(const darboux_chart& chart,
                                    const foliated_perturbation& spec) {
  check_spec_arity(chart, spec.q1, spec.q2);
  velocity_field a;
  a.arity = chart.sys.n;
  a.eval = [chart, spec](const vecn& x) {
    const vecn b =
        perturbation_rhs(chart, spec.q1, spec.q2, nullptr, nullptr, x);
    return cross_expansion_at(chart, b, x);
  };
  return a;
}

double foliation_tangency(const integrable_system& sys,
                          const velocity_field& a,
                          const std::vector<vecn>& points) {
  double worst = 0.0;
  for (const vecn& x : points) {
    const vecn v = a.eval(x);
    for (const auto& c : sys.casimirs) {
      const vecn g = gradient(c, x);
      double dot = 0.0;
      for (int i = 0; i < sys.n; ++i) dot += g[i] * v[i];
      worst = std::max(worst, std::abs(dot));
    }
  }
  return worst;
}

double leaf_tangency(const darboux_chart& chart, const velocity_field& a,
                     const leaf_perturbation& spec,
                     const std::vector<vecn>& points) {
  const int n = chart.sys.n;
  double worst = 0.0;
  for (const vecn& x : points) {
    const vecn v = a.eval(x);
    const vecn y = chart_point(chart, x);
    for (int i = 0; i < n - 2; ++i) {
      const vecn g = gradient(chart.sys.casimirs[i], x);
      double dot = 0.0;
      for (int d = 0; d < n; ++d) dot += g[d] * v[d];
      double expected = 0.0;
      if (!spec.r.empty()) {
        for (int j = 0; j < n - 2; ++j) {
          const scalar_field& rij = spec.r[i][j];
          if (!rij.eval) continue;
          expected += (chart.sys.casimirs[j].eval(x) - spec.leaf.c[j]) *
                      rij.eval(y);
        }
      }
      worst = std::max(worst, std::abs(dot - expected));
    }
  }
  return worst;
}

velocity_field perturbed_field(const velocity_field& x,
                               const velocity_field& a, double eps) {
  if (x.arity != a.arity)
    throw std::invalid_argument("perturbed_field: arity mismatch");
  if (eps < 0.0)
    throw std::invalid_argument("perturbed_field: eps must be >= 0");
  velocity_field out;
  out.arity = x.arity;
  out.eval = [x, a, eps](const vecn& p) {
    vecn vx = x.eval(p);
    if (eps != 0.0) {
      const vecn va = a.eval(p);
      for (std::size_t i = 0; i < vx.size(); ++i) vx[i] += eps * va[i];
    }
    return vx;
  };
  return out;
}

}  // namespace leafcycle
