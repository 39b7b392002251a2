// leafcycle CLI: experiment configuration and subcommand runners.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// The experiment is one JSON document (see README.md for the schema).
// Runners return process exit codes:
//   0  success
//   1  configuration error
//   2  Melnikov curve identically zero (no isolation possible)
//   3  cycle hunt produced no confirmed cycle
//   4  verification group failure

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "leafcycle/cycles.hpp"
#include "leafcycle/errors.hpp"
#include "leafcycle/jacobi.hpp"
#include "leafcycle/numkernel.hpp"

namespace leafcycle::cli {

// A configuration defect (maps to exit code 1).
class config_error : public error {
 public:
  using error::error;
};

struct custom_system_config {
  int n = 0;
  std::vector<std::string> casimirs;  // n-2 expressions over x1..xn
  std::string hamiltonian;
  std::string nu = "1";
  std::vector<std::string> rhs;  // optional: n expressions to check against

  bool operator==(const custom_system_config&) const = default;
};

struct polynomial_config {
  int m = 1;
  // coefficient expressions over {c, k, pi}, keyed "i,j"
  std::vector<std::pair<std::string, std::string>> r;  // sorted by key
  std::vector<std::pair<std::string, std::string>> s;

  bool operator==(const polynomial_config&) const = default;
};

struct leaf_grid_config {
  vecn c_first;
  vecn c_last;
  int count = 2;

  bool operator==(const leaf_grid_config&) const = default;
};

struct jacobi_grid_config {
  double t_min = 0.0;
  double t_max = 2.0;
  int count = 41;

  bool operator==(const jacobi_grid_config&) const = default;
};

struct experiment_config {
  // system
  bool custom = false;
  int n = 3;
  vecn k;                                       // built-in moduli
  std::optional<custom_system_config> custom_system;
  std::vector<int> signs;
  vecn leaf_c;
  std::optional<leaf_grid_config> leaf_grid;    // foliated sweep only

  // perturbation
  std::string mode = "foliated";                // "foliated" | "leaf-fixed"
  std::string q1, q2;                           // foliated expressions
  std::string p1, p2;                           // leaf-fixed expressions
  std::vector<std::vector<std::string>> r;      // leaf-fixed R table, may be empty
  std::optional<polynomial_config> polynomial;  // alternative representation

  // experiment parameters
  vecn eps_list;
  std::optional<std::array<double, 2>> h_range;  // override
  int h_samples = 200;
  int quadrature_points = 512;
  integrator_config tolerances;

  // verification inputs
  std::vector<vecn> verify_points;  // ambient audit points (optional)

  jacobi_grid_config jacobi;  // t-grid for the jacobi subcommand

  std::string output_prefix;  // optional basename prefix for result files

  bool operator==(const experiment_config&) const = default;
};

struct run_options {
  std::string out_dir = ".";
  unsigned long seed = 0;
  int threads = 1;
};

// Parses and validates a config document. Throws config_error.
experiment_config parse_config(const nlohmann::json& doc);
experiment_config load_config(const std::string& path);

// Canonical JSON form; parse_config(canonical_config(c)) == c.
nlohmann::json canonical_config(const experiment_config& cfg);

int run_melnikov(const experiment_config& cfg, const run_options& opt);
int run_hunt(const experiment_config& cfg, const run_options& opt);
int run_verify(const experiment_config& cfg, const run_options& opt);
int run_jacobi(const experiment_config& cfg, const run_options& opt);

// Formats a double with 17 significant digits ('.' decimal point).
std::string csv_number(double v);

}  // namespace leafcycle::cli
