// leafcycle: shared numerical kernel (implementation).
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace leafcycle {

namespace {

constexpr double kPi = std::numbers::pi;

// Relative determinant threshold below which a gradient matrix counts as
// singular (dependent gradients / non-regular point).
constexpr double kSingularRel = 1e-12;

double l2_norm(const vecn& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

// In-place LU factorization with partial pivoting.
// Returns the pivot sign (+1/-1), or 0 when a pivot column is exactly zero.
int lu_factor(std::vector<vecn>& m, std::vector<int>& perm) {
  const int n = static_cast<int>(m.size());
  perm.resize(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  int sign = 1;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(m[col][col]);
    for (int r = col + 1; r < n; ++r) {
      const double a = std::abs(m[r][col]);
      if (a > best) {
        best = a;
        piv = r;
      }
    }
    if (best == 0.0) return 0;  // exactly singular
    if (piv != col) {
      std::swap(m[piv], m[col]);
      std::swap(perm[piv], perm[col]);
      sign = -sign;
    }
    const double d = m[col][col];
    for (int r = col + 1; r < n; ++r) {
      const double f = m[r][col] / d;
      m[r][col] = f;
      for (int c = col + 1; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return sign;
}

double lu_determinant(const std::vector<vecn>& lu, int sign) {
  double det = static_cast<double>(sign);
  for (std::size_t i = 0; i < lu.size(); ++i) det *= lu[i][i];
  return det;
}

void check_square(const std::vector<vecn>& rows, const char* who) {
  const std::size_t n = rows.size();
  if (n == 0) throw std::invalid_argument(std::string(who) + ": empty matrix");
  for (const auto& r : rows) {
    if (r.size() != n)
      throw std::invalid_argument(std::string(who) + ": matrix not square");
    if (!all_finite(r))
      throw nonfinite_error(std::string(who) + ": non-finite matrix entry");
  }
}

// 15-point Gauss-Legendre nodes/weights on [-1, 1], generated once by Newton
// iteration on the Legendre polynomial (no transcribed tables).
struct gl15 {
  double x[15];
  double w[15];
  gl15() {
    const int n = 15;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      // Chebyshev-like initial guess for the i-th root.
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        // Evaluate P_n(z) and P'_n(z) by the three-term recurrence.
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        pp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / pp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
      w[n - 1 - i] = w[i];
    }
  }
};

const gl15& gl15_rule() {
  static const gl15 rule;
  return rule;
}

double gl15_panel(const std::function<double(double)>& g, double a, double b) {
  const gl15& rule = gl15_rule();
  const double mid = 0.5 * (a + b);
  const double hal = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 15; ++i) s += rule.w[i] * g(mid + hal * rule.x[i]);
  return s * hal;
}

double adaptive_gl_recurse(const std::function<double(double)>& g, double a,
                           double b, double whole, double tol, double scale,
                           int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl15_panel(g, a, mid);
  const double right = gl15_panel(g, mid, b);
  const double refined = left + right;
  if (!std::isfinite(refined))
    throw nonfinite_error("adaptive_gauss_legendre: non-finite panel");
  if (depth > 48)
    throw no_convergence_error(
        "adaptive_gauss_legendre: recursion depth exceeded");
  if (std::abs(refined - whole) <= tol * scale) return refined;
  return adaptive_gl_recurse(g, a, mid, left, 0.5 * tol, scale, depth + 1) +
         adaptive_gl_recurse(g, mid, b, right, 0.5 * tol, scale, depth + 1);
}

}  // namespace

bool all_finite(const vecn& v) {
  for (double a : v)
    if (!std::isfinite(a)) return false;
  return true;
}

scalar_field constant_field(int arity, double value) {
  scalar_field f;
  f.arity = arity;
  f.eval = [value](const vecn&) { return value; };
  f.grad = [arity](const vecn&) { return vecn(arity, 0.0); };
  return f;
}

scalar_field coordinate_field(int arity, int index) {
  if (index < 0 || index >= arity)
    throw std::invalid_argument("coordinate_field: index out of range");
  scalar_field f;
  f.arity = arity;
  f.eval = [index](const vecn& x) { return x[index]; };
  f.grad = [arity, index](const vecn&) {
    vecn g(arity, 0.0);
    g[index] = 1.0;
    return g;
  };
  return f;
}

vecn gradient(const scalar_field& f, const vecn& x) {
  if (static_cast<int>(x.size()) != f.arity)
    throw std::invalid_argument("gradient: arity mismatch");
  if (f.grad) {
    vecn g = f.grad(x);
    if (!all_finite(g)) throw nonfinite_error("gradient: non-finite analytic gradient");
    return g;
  }
  // 4th-order central differences; step scaled per axis so the stencil stays
  // accurate both near the origin and at large coordinates.
  static const double step0 =
      std::cbrt(std::numeric_limits<double>::epsilon());
  const int n = f.arity;
  vecn g(n);
  vecn xi = x;
  for (int i = 0; i < n; ++i) {
    double h = step0 * std::max(1.0, std::abs(x[i]));
    // Round h so that x[i] + h and x[i] - h differ from x[i] by exactly h.
    volatile double tmp = x[i] + h;
    h = tmp - x[i];
    const double saved = xi[i];
    xi[i] = saved + 2.0 * h;
    const double fp2 = f.eval(xi);
    xi[i] = saved + h;
    const double fp1 = f.eval(xi);
    xi[i] = saved - h;
    const double fm1 = f.eval(xi);
    xi[i] = saved - 2.0 * h;
    const double fm2 = f.eval(xi);
    xi[i] = saved;
    g[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    if (!std::isfinite(g[i]))
      throw nonfinite_error("gradient: non-finite finite-difference value");
  }
  return g;
}

double determinant(std::vector<vecn> rows) {
  check_square(rows, "determinant");
  std::vector<int> perm;
  const int sign = lu_factor(rows, perm);
  if (sign == 0) return 0.0;
  return lu_determinant(rows, sign);
}

double jacobian_determinant(const std::vector<scalar_field>& fields,
                            const vecn& x) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(fields.size()) != n)
    throw std::invalid_argument(
        "jacobian_determinant: need exactly n fields of arity n");
  std::vector<vecn> rows;
  rows.reserve(n);
  for (const auto& f : fields) {
    if (f.arity != n)
      throw std::invalid_argument("jacobian_determinant: arity mismatch");
    rows.push_back(gradient(f, x));
  }
  return determinant(std::move(rows));
}

vecn generalized_cross(const std::vector<vecn>& u) {
  if (u.empty())
    throw std::invalid_argument("generalized_cross: no input vectors");
  const int n = static_cast<int>(u[0].size());
  if (static_cast<int>(u.size()) != n - 1)
    throw std::invalid_argument(
        "generalized_cross: need exactly n-1 vectors in R^n");
  for (const auto& v : u) {
    if (static_cast<int>(v.size()) != n)
      throw std::invalid_argument("generalized_cross: mixed arities");
    if (!all_finite(v))
      throw nonfinite_error("generalized_cross: non-finite input");
  }
  // Component w of the result is the signed minor obtained by deleting
  // column w from the (n-1) x n matrix of inputs:
  //   v_w = (-1)^(n + w + 1) * det(U minus column w)     (w zero-based).
  vecn v(n);
  std::vector<vecn> minor(n - 1, vecn(n - 1));
  for (int w = 0; w < n; ++w) {
    for (int r = 0; r < n - 1; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == w) continue;
        minor[r][cc++] = u[r][c];
      }
    }
    const double m = determinant(minor);
    v[w] = (((n + w + 1) % 2) == 0) ? m : -m;
  }
  return v;
}

vecn linear_solve(const std::vector<vecn>& rows, const vecn& rhs) {
  check_square(rows, "linear_solve");
  const int n = static_cast<int>(rows.size());
  if (static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("linear_solve: rhs size mismatch");
  double norm_product = 1.0;
  for (const auto& r : rows) {
    const double nr = l2_norm(r);
    if (nr == 0.0)
      throw singular_matrix_error("linear_solve: zero row (dependent gradients)");
    norm_product *= nr;
  }
  std::vector<vecn> lu = rows;
  std::vector<int> perm;
  const int sign = lu_factor(lu, perm);
  const double det = (sign == 0) ? 0.0 : lu_determinant(lu, sign);
  if (std::abs(det) < kSingularRel * norm_product)
    throw singular_matrix_error(
        "linear_solve: matrix singular relative to row scales");
  // Forward substitution on the permuted right-hand side, then back
  // substitution through U.
  vecn y(n);
  for (int i = 0; i < n; ++i) {
    double s = rhs[perm[i]];
    for (int j = 0; j < i; ++j) s -= lu[i][j] * y[j];
    y[i] = s;
  }
  vecn x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < n; ++j) s -= lu[i][j] * x[j];
    x[i] = s / lu[i][i];
  }
  if (!all_finite(x)) throw nonfinite_error("linear_solve: non-finite solution");
  return x;
}

double periodic_quadrature(const std::function<double(double)>& g, int n) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw std::invalid_argument(
        "periodic_quadrature: sample count must be a power of two >= 16");
  const double h = 2.0 * kPi / n;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = g(h * k);
    if (!std::isfinite(v))
      throw nonfinite_error("periodic_quadrature: non-finite sample");
    s += v;
  }
  return s * h;
}

double adaptive_gauss_legendre(const std::function<double(double)>& g,
                               double a, double b, double tol) {
  if (!(b > a)) {
    if (a == b) return 0.0;
    throw std::invalid_argument("adaptive_gauss_legendre: requires a < b");
  }
  const double whole = gl15_panel(g, a, b);
  const double scale = std::max(1.0, std::abs(whole));
  return adaptive_gl_recurse(g, a, b, whole, tol, scale, 0);
}

double trig_moment(int i, int j) {
  if (i < 0 || j < 0)
    throw std::invalid_argument("trig_moment: negative exponent");
  if (i + j > 64)
    throw overflow_guard_error("trig_moment: exponents beyond guard (i+j > 64)");
  if ((i % 2) != 0 || (j % 2) != 0) return 0.0;
  const int p = i / 2;
  const int q = j / 2;
  // T(2p, 2q) = 2*pi * prod_{l=1..p} (2l-1)/(2l) * prod_{l=1..q} (2l-1)/(2(p+l)),
  // the half-integer Gamma reduction evaluated as a product of ratios <= 1.
  double r = 2.0 * kPi;
  for (int l = 1; l <= p; ++l) r *= (2.0 * l - 1.0) / (2.0 * l);
  for (int l = 1; l <= q; ++l) r *= (2.0 * l - 1.0) / (2.0 * (p + l));
  return r;
}

double refine_root(const std::function<double(double)>& g, double a, double b,
                   double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("refine_root: tol must be > 0");
  double fa = g(a);
  double fb = g(b);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw nonfinite_error("refine_root: non-finite bracket value");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw no_sign_change_error("refine_root: no sign change over bracket");
  // Brent's method: inverse quadratic / secant steps with a bisection
  // fallback, keeping a guaranteed bracket at all times.
  double c = a, fc = fa;
  double d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;  b = c;  c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q_;
      const double s = fb / fa;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q_ = 1.0 - s;
      } else {  // inverse quadratic
        const double qq = fa / fc;
        const double rr = fb / fc;
        p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
        q_ = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q_ = -q_;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q_ - std::abs(tol1 * q_),
                             std::abs(e * q_))) {
        e = d;
        d = p / q_;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = g(b);
    if (!std::isfinite(fb))
      throw nonfinite_error("refine_root: non-finite evaluation");
  }
  throw no_convergence_error("refine_root: iteration cap reached");
}

}  // namespace leafcycle
