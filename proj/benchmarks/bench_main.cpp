// Microbenchmarks for the hot paths: bracket-field evaluation, chart
// Jacobians, loop-integral quadrature, the closed polynomial form, orbit
// integration, and polyline distance.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "leafcycle/cycles.hpp"
#include "leafcycle/darboux.hpp"
#include "leafcycle/integrable.hpp"
#include "leafcycle/jacobi.hpp"
#include "leafcycle/melnikov.hpp"
#include "leafcycle/perturb.hpp"

using namespace leafcycle;

namespace {

hyperelliptic_params make_params(std::vector<double> k) {
  hyperelliptic_params p;
  p.n = static_cast<int>(k.size()) + 2;
  p.k = std::move(k);
  return p;
}

void bench_bracket_field(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> k(n - 2, 0.8);
  const integrable_system sys = build_system(make_params(k));
  vecn x(n, 0.7);
  x[0] = 0.3;
  x[1] = -0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vector_field_at(sys, x));
  }
}

void bench_chart_jacobian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> k(n - 2, 0.8);
  const darboux_chart chart =
      build_chart(make_params(k), sign_tuple(n - 2, 1));
  vecn x(n, 0.7);
  x[0] = 0.3;
  x[1] = -0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chart_jacobian_determinant(chart, x));
  }
}

void bench_loop_integral(benchmark::State& state) {
  const int n_quad = static_cast<int>(state.range(0));
  leaf_coordinates leaf;
  leaf.c = {2.0};
  const orbit_parameterization orbit =
      orbit_family(make_params({1.0}), sign_tuple{1}, leaf);
  const scalar_field q1{3, [](const vecn& y) {
                          return y[0] * (1.0 - (y[0] * y[0] + y[1] * y[1]));
                        }};
  const scalar_field q2{3, [](const vecn&) { return 0.0; }};
  for (auto _ : state) {
    benchmark::DoNotOptimize(melnikov_integral(orbit, q1, q2, 0.37, n_quad));
  }
}

void bench_polynomial_closed_form(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  polynomial_perturbation pp = make_polynomial_perturbation(m);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) {
      const double rv = coeff(rng), sv = coeff(rng);
      pp.r[i][j] = [rv](const vecn&) { return rv; };
      pp.s[i][j] = [sv](const vecn&) { return sv; };
    }
  leaf_coordinates leaf;
  leaf.c = {2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(polynomial_melnikov(pp, leaf));
  }
}

void bench_orbit_period(benchmark::State& state) {
  const darboux_chart chart = build_chart(make_params({1.0}), sign_tuple{1});
  leaf_coordinates leaf;
  leaf.c = {2.0};
  const orbit_parameterization orbit =
      orbit_family(make_params({1.0}), sign_tuple{1}, leaf);
  const velocity_field base = realized_field(chart.sys);
  const integrator_config cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(displacement(base, orbit, 0.5, cfg));
  }
}

void bench_hausdorff(benchmark::State& state) {
  const int pts = static_cast<int>(state.range(0));
  std::vector<vecn> a, b;
  for (int i = 0; i < pts; ++i) {
    const double t = 2.0 * 3.14159265358979 * i / pts;
    a.push_back({std::cos(t), std::sin(t)});
    b.push_back({1.05 * std::cos(t + 0.01), 1.05 * std::sin(t + 0.01)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(hausdorff_distance(a, b));
  }
}

BENCHMARK(bench_bracket_field)->Arg(3)->Arg(6);
BENCHMARK(bench_chart_jacobian)->Arg(3)->Arg(6);
BENCHMARK(bench_loop_integral)->Arg(128)->Arg(512);
BENCHMARK(bench_polynomial_closed_form)->Arg(5)->Arg(9);
BENCHMARK(bench_orbit_period);
BENCHMARK(bench_hausdorff)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
