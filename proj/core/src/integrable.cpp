// leafcycle: completely integrable systems (implementation).
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/integrable.hpp"

#include <cmath>
#include <stdexcept>

namespace leafcycle {

void validate(const integrable_system& sys) {
  if (sys.n < 3)
    throw std::invalid_argument("integrable_system: dimension must be >= 3");
  if (static_cast<int>(sys.casimirs.size()) != sys.n - 2)
    throw std::invalid_argument(
        "integrable_system: need exactly n-2 Casimir fields");
  for (const auto& c : sys.casimirs)
    if (c.arity != sys.n)
      throw std::invalid_argument("integrable_system: Casimir arity mismatch");
  if (sys.hamiltonian.arity != sys.n)
    throw std::invalid_argument("integrable_system: Hamiltonian arity mismatch");
  if (sys.rescale.arity != sys.n)
    throw std::invalid_argument("integrable_system: rescale arity mismatch");
  if (!sys.hamiltonian.eval || !sys.rescale.eval)
    throw std::invalid_argument("integrable_system: missing eval functions");
}

namespace {

// Gradient rows shared by the field and bracket evaluations: the n-2
// Casimir gradients first, then two slots filled by the caller.
std::vector<vecn> casimir_rows(const integrable_system& sys, const vecn& x) {
  std::vector<vecn> rows;
  rows.reserve(sys.n);
  for (const auto& c : sys.casimirs) rows.push_back(gradient(c, x));
  return rows;
}

}  // namespace

vecn vector_field_at(const integrable_system& sys, const vecn& x) {
  if (static_cast<int>(x.size()) != sys.n)
    throw std::invalid_argument("vector_field_at: point arity mismatch");
  if (!sys.contains(x))
    throw outside_domain_error("vector_field_at: point outside declared domain");
  const double nu = sys.rescale.eval(x);
  if (!std::isfinite(nu))
    throw nonfinite_error("vector_field_at: non-finite rescale value");
  std::vector<vecn> rows = casimir_rows(sys, x);
  const vecn grad_h = gradient(sys.hamiltonian, x);
  rows.emplace_back(sys.n, 0.0);  // coordinate slot (row n-1)
  rows.push_back(grad_h);
  vecn out(sys.n);
  for (int i = 0; i < sys.n; ++i) {
    auto& slot = rows[sys.n - 2];
    std::fill(slot.begin(), slot.end(), 0.0);
    slot[i] = 1.0;
    out[i] = nu * determinant(rows);
  }
  if (!all_finite(out))
    throw nonfinite_error("vector_field_at: non-finite field value");
  return out;
}

velocity_field realized_field(const integrable_system& sys) {
  validate(sys);
  velocity_field f;
  f.arity = sys.n;
  f.eval = [sys](const vecn& x) { return vector_field_at(sys, x); };
  return f;
}

double poisson_bracket(const integrable_system& sys, const scalar_field& f,
                       const scalar_field& g, const vecn& x) {
  if (f.arity != sys.n || g.arity != sys.n)
    throw std::invalid_argument("poisson_bracket: arity mismatch");
  const double nu = sys.rescale.eval(x);
  std::vector<vecn> rows = casimir_rows(sys, x);
  rows.push_back(gradient(f, x));
  rows.push_back(gradient(g, x));
  const double det = determinant(std::move(rows));
  const double v = nu * det;
  if (!std::isfinite(v))
    throw nonfinite_error("poisson_bracket: non-finite value");
  return v;
}

drift_report first_integral_drift(const integrable_system& sys,
                                  const velocity_field& field,
                                  const std::vector<vecn>& points) {
  drift_report rep;
  for (const vecn& x : points) {
    const vecn v = field.eval(x);
    for (const auto& c : sys.casimirs) {
      const vecn g = gradient(c, x);
      double dot = 0.0;
      for (int i = 0; i < sys.n; ++i) dot += g[i] * v[i];
      rep.max_casimir_drift = std::max(rep.max_casimir_drift, std::abs(dot));
    }
    const vecn gh = gradient(sys.hamiltonian, x);
    double dot_h = 0.0;
    for (int i = 0; i < sys.n; ++i) dot_h += gh[i] * v[i];
    rep.max_hamiltonian_drift =
        std::max(rep.max_hamiltonian_drift, std::abs(dot_h));
  }
  return rep;
}

}  // namespace leafcycle
