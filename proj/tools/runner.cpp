// leafcycle CLI: experiment configuration and subcommand runners.
// Part of the leafcycle library. MIT license; see LICENSE.

#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "leafcycle/darboux.hpp"
#include "leafcycle/expr.hpp"
#include "leafcycle/integrable.hpp"
#include "leafcycle/melnikov.hpp"
#include "leafcycle/perturb.hpp"

namespace leafcycle::cli {

using nlohmann::json;

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// ---------------------------------------------------------------- utilities

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open output file: " + path);
  out << content;
  if (!out) throw error("write failed: " + path);
}

std::string output_path(const run_options& opt, const experiment_config& cfg,
                        const std::string& name) {
  const std::string base =
      cfg.output_prefix.empty() ? name : cfg.output_prefix + "_" + name;
  return (std::filesystem::path(opt.out_dir) / base).string();
}

// Status text destined for a CSV cell: keep the separator unambiguous.
std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

double finite_or(double v, double fallback) {
  return std::isfinite(v) ? v : fallback;
}

// Runs fn(0..count-1) on up to `threads` workers; exceptions are collected
// and the first one rethrown after all workers finish.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min({threads, count, 64}));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ------------------------------------------------------------ JSON reading

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw config_error("config: '" + where + "' must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw config_error("config: unknown key '" + item.key() + "' in '" +
                         where + "'");
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw config_error("config: '" + where + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw config_error("config: '" + where + "' must be finite");
  return v;
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer())
    throw config_error("config: '" + where + "' must be an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string())
    throw config_error("config: '" + where + "' must be a string");
  return j.get<std::string>();
}

vecn get_vecn(const json& j, const std::string& where) {
  if (!j.is_array())
    throw config_error("config: '" + where + "' must be an array of numbers");
  vecn out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Parses an expression, mapping parser failures to config errors that name
// the offending field.
expression checked_expression(const std::string& src,
                              const variable_context& vars,
                              const std::string& where) {
  try {
    return parse_expression(src, vars);
  } catch (const std::exception& ex) {
    throw config_error("config: " + where + ": " + ex.what());
  }
}

// ----------------------------------------------------------- configuration

void validate_expressions(const experiment_config& cfg);

}  // namespace

experiment_config parse_config(const json& doc) {
  if (!doc.is_object()) throw config_error("config: top level must be a JSON object");
  check_keys(doc, "(top level)",
             {"schema_version", "system", "signs", "leaf", "leaf_grid",
              "perturbation", "eps_list", "h_range", "h_samples",
              "quadrature_points", "tolerances", "verify", "jacobi",
              "output_prefix"});
  if (doc.contains("schema_version") &&
      get_int(doc.at("schema_version"), "schema_version") != 1)
    throw config_error("config: unsupported schema_version (expected 1)");

  experiment_config cfg;

  // --- system
  if (!doc.contains("system"))
    throw config_error("config: missing 'system'");
  const json& sys = doc.at("system");
  check_keys(sys, "system",
             {"type", "n", "k", "casimirs", "hamiltonian", "nu", "rhs"});
  const std::string type =
      sys.contains("type") ? get_string(sys.at("type"), "system.type")
                           : std::string("hyperelliptic");
  if (type != "hyperelliptic" && type != "custom")
    throw config_error(
        "config: system.type must be 'hyperelliptic' or 'custom'");
  cfg.custom = (type == "custom");
  if (!sys.contains("n")) throw config_error("config: missing 'system.n'");
  cfg.n = get_int(sys.at("n"), "system.n");
  if (cfg.n < 3) throw config_error("config: system.n must be >= 3");

  if (cfg.custom) {
    custom_system_config cs;
    cs.n = cfg.n;
    if (!sys.contains("casimirs") || !sys.at("casimirs").is_array())
      throw config_error("config: custom system needs 'system.casimirs'");
    for (std::size_t i = 0; i < sys.at("casimirs").size(); ++i)
      cs.casimirs.push_back(get_string(sys.at("casimirs")[i],
                                       "system.casimirs[" +
                                           std::to_string(i) + "]"));
    if (static_cast<int>(cs.casimirs.size()) != cfg.n - 2)
      throw config_error("config: custom system needs n - 2 casimirs");
    if (!sys.contains("hamiltonian"))
      throw config_error("config: custom system needs 'system.hamiltonian'");
    cs.hamiltonian = get_string(sys.at("hamiltonian"), "system.hamiltonian");
    if (sys.contains("nu")) cs.nu = get_string(sys.at("nu"), "system.nu");
    if (sys.contains("rhs")) {
      if (!sys.at("rhs").is_array())
        throw config_error("config: system.rhs must be an array");
      for (std::size_t i = 0; i < sys.at("rhs").size(); ++i)
        cs.rhs.push_back(
            get_string(sys.at("rhs")[i], "system.rhs[" + std::to_string(i) + "]"));
      if (static_cast<int>(cs.rhs.size()) != cfg.n)
        throw config_error("config: system.rhs must have n entries");
    }
    cfg.custom_system = std::move(cs);
  } else {
    if (!sys.contains("k")) throw config_error("config: missing 'system.k'");
    cfg.k = get_vecn(sys.at("k"), "system.k");
    if (static_cast<int>(cfg.k.size()) != cfg.n - 2)
      throw config_error("config: system.k must have n - 2 entries");
  }

  // --- signs
  if (doc.contains("signs")) {
    const json& js = doc.at("signs");
    if (!js.is_array())
      throw config_error("config: 'signs' must be an array of +1/-1");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const int s = get_int(js[i], "signs[" + std::to_string(i) + "]");
      if (s != 1 && s != -1)
        throw config_error("config: signs entries must be +1 or -1");
      cfg.signs.push_back(s);
    }
  } else {
    cfg.signs.assign(cfg.n - 2, 1);
  }
  if (static_cast<int>(cfg.signs.size()) != cfg.n - 2)
    throw config_error("config: 'signs' must have n - 2 entries");

  // --- leaf
  if (doc.contains("leaf")) {
    check_keys(doc.at("leaf"), "leaf", {"c"});
    if (!doc.at("leaf").contains("c"))
      throw config_error("config: 'leaf' needs 'c'");
    cfg.leaf_c = get_vecn(doc.at("leaf").at("c"), "leaf.c");
    if (static_cast<int>(cfg.leaf_c.size()) != cfg.n - 2)
      throw config_error("config: leaf.c must have n - 2 entries");
  } else if (!cfg.custom) {
    cfg.leaf_c.assign(cfg.n - 2, 1.0);
  }

  // --- leaf grid (foliated sweep)
  if (doc.contains("leaf_grid")) {
    const json& jg = doc.at("leaf_grid");
    check_keys(jg, "leaf_grid", {"c_first", "c_last", "count"});
    leaf_grid_config grid;
    if (!jg.contains("c_first") || !jg.contains("c_last") ||
        !jg.contains("count"))
      throw config_error(
          "config: leaf_grid needs 'c_first', 'c_last', and 'count'");
    grid.c_first = get_vecn(jg.at("c_first"), "leaf_grid.c_first");
    grid.c_last = get_vecn(jg.at("c_last"), "leaf_grid.c_last");
    grid.count = get_int(jg.at("count"), "leaf_grid.count");
    if (static_cast<int>(grid.c_first.size()) != cfg.n - 2 ||
        static_cast<int>(grid.c_last.size()) != cfg.n - 2)
      throw config_error("config: leaf_grid vectors must have n - 2 entries");
    if (grid.count < 2 || grid.count > 10000)
      throw config_error("config: leaf_grid.count must lie in [2, 10000]");
    cfg.leaf_grid = std::move(grid);
  }

  // --- perturbation
  if (doc.contains("perturbation")) {
    const json& jp = doc.at("perturbation");
    check_keys(jp, "perturbation",
               {"mode", "q1", "q2", "p1", "p2", "r", "polynomial"});
    if (jp.contains("mode")) cfg.mode = get_string(jp.at("mode"), "perturbation.mode");
    if (cfg.mode != "foliated" && cfg.mode != "leaf-fixed")
      throw config_error(
          "config: perturbation.mode must be 'foliated' or 'leaf-fixed'");

    const bool has_poly = jp.contains("polynomial");
    const bool has_expr = jp.contains("q1") || jp.contains("q2") ||
                          jp.contains("p1") || jp.contains("p2") ||
                          jp.contains("r");
    if (has_poly && has_expr)
      throw config_error(
          "config: give either a polynomial table or expression fields, not "
          "both");

    if (has_poly) {
      const json& jpoly = jp.at("polynomial");
      check_keys(jpoly, "perturbation.polynomial", {"m", "r", "s"});
      polynomial_config poly;
      if (!jpoly.contains("m"))
        throw config_error("config: perturbation.polynomial needs 'm'");
      poly.m = get_int(jpoly.at("m"), "perturbation.polynomial.m");
      if (poly.m < 1 || poly.m > 25)
        throw config_error(
            "config: perturbation.polynomial.m must lie in [1, 25]");
      const auto read_table = [&](const char* key) {
        std::vector<std::pair<std::string, std::string>> table;
        if (!jpoly.contains(key)) return table;
        const json& jt = jpoly.at(key);
        if (!jt.is_object())
          throw config_error(std::string("config: perturbation.polynomial.") +
                             key + " must be an object keyed \"i,j\"");
        for (const auto& item : jt.items()) {
          int i = -1, j2 = -1;
          char extra = 0;
          if (std::sscanf(item.key().c_str(), "%d,%d%c", &i, &j2, &extra) !=
                  2 ||
              i < 0 || j2 < 0)
            throw config_error(
                std::string("config: perturbation.polynomial.") + key +
                " key '" + item.key() + "' is not of the form \"i,j\"");
          if (i + j2 > poly.m)
            throw config_error(
                std::string("config: perturbation.polynomial.") + key +
                " key '" + item.key() + "' exceeds degree m");
          table.emplace_back(item.key(),
                             get_string(item.value(),
                                        std::string("perturbation.polynomial.") +
                                            key + "." + item.key()));
        }
        std::sort(table.begin(), table.end());
        return table;
      };
      poly.r = read_table("r");
      poly.s = read_table("s");
      cfg.polynomial = std::move(poly);
    } else {
      if (cfg.mode == "foliated") {
        if (!jp.contains("q1") || !jp.contains("q2"))
          throw config_error(
              "config: foliated perturbation needs 'q1' and 'q2'");
        cfg.q1 = get_string(jp.at("q1"), "perturbation.q1");
        cfg.q2 = get_string(jp.at("q2"), "perturbation.q2");
      } else {
        if (!jp.contains("p1") || !jp.contains("p2"))
          throw config_error(
              "config: leaf-fixed perturbation needs 'p1' and 'p2'");
        cfg.p1 = get_string(jp.at("p1"), "perturbation.p1");
        cfg.p2 = get_string(jp.at("p2"), "perturbation.p2");
        if (jp.contains("r")) {
          const json& jr = jp.at("r");
          if (!jr.is_array())
            throw config_error("config: perturbation.r must be an array of "
                               "arrays of expressions");
          for (std::size_t i = 0; i < jr.size(); ++i) {
            if (!jr[i].is_array())
              throw config_error("config: perturbation.r rows must be arrays");
            std::vector<std::string> row;
            for (std::size_t j2 = 0; j2 < jr[i].size(); ++j2)
              row.push_back(get_string(
                  jr[i][j2], "perturbation.r[" + std::to_string(i) + "][" +
                                 std::to_string(j2) + "]"));
            cfg.r.push_back(std::move(row));
          }
          const std::size_t d = static_cast<std::size_t>(cfg.n - 2);
          if (cfg.r.size() != d)
            throw config_error("config: perturbation.r must be (n-2) x (n-2)");
          for (const auto& row : cfg.r)
            if (row.size() != d)
              throw config_error(
                  "config: perturbation.r must be (n-2) x (n-2)");
        }
      }
    }
  }

  // --- experiment parameters
  if (doc.contains("eps_list")) {
    cfg.eps_list = get_vecn(doc.at("eps_list"), "eps_list");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
      if (!(cfg.eps_list[i] > 0.0))
        throw config_error("config: eps_list entries must be positive");
      if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1]))
        throw config_error("config: eps_list must be strictly decreasing");
    }
  }
  if (doc.contains("h_range")) {
    const vecn hr = get_vecn(doc.at("h_range"), "h_range");
    if (hr.size() != 2 || !(hr[0] >= 0.0) || !(hr[0] < hr[1]))
      throw config_error("config: h_range must be [lo, hi] with 0 <= lo < hi");
    cfg.h_range = std::array<double, 2>{hr[0], hr[1]};
  }
  if (doc.contains("h_samples")) {
    cfg.h_samples = get_int(doc.at("h_samples"), "h_samples");
    if (cfg.h_samples < 8 || cfg.h_samples > 100000)
      throw config_error("config: h_samples must lie in [8, 100000]");
  }
  if (doc.contains("quadrature_points")) {
    cfg.quadrature_points =
        get_int(doc.at("quadrature_points"), "quadrature_points");
    const int q = cfg.quadrature_points;
    if (q < 16 || (q & (q - 1)) != 0)
      throw config_error(
          "config: quadrature_points must be a power of two >= 16");
  }
  if (doc.contains("tolerances")) {
    const json& jt = doc.at("tolerances");
    check_keys(jt, "tolerances",
               {"rel_tol", "abs_tol", "max_step", "max_time"});
    if (jt.contains("rel_tol"))
      cfg.tolerances.rel_tol = get_number(jt.at("rel_tol"), "tolerances.rel_tol");
    if (jt.contains("abs_tol"))
      cfg.tolerances.abs_tol = get_number(jt.at("abs_tol"), "tolerances.abs_tol");
    if (jt.contains("max_step"))
      cfg.tolerances.max_step =
          get_number(jt.at("max_step"), "tolerances.max_step");
    if (jt.contains("max_time"))
      cfg.tolerances.max_time =
          get_number(jt.at("max_time"), "tolerances.max_time");
  }
  try {
    validate(cfg.tolerances);
  } catch (const std::exception& ex) {
    throw config_error(std::string("config: tolerances: ") + ex.what());
  }

  // --- verify inputs
  if (doc.contains("verify")) {
    const json& jv = doc.at("verify");
    check_keys(jv, "verify", {"points"});
    if (jv.contains("points")) {
      if (!jv.at("points").is_array())
        throw config_error("config: verify.points must be an array of points");
      for (std::size_t i = 0; i < jv.at("points").size(); ++i) {
        vecn p = get_vecn(jv.at("points")[i],
                          "verify.points[" + std::to_string(i) + "]");
        if (static_cast<int>(p.size()) != cfg.n)
          throw config_error("config: verify.points entries must have n "
                             "coordinates");
        cfg.verify_points.push_back(std::move(p));
      }
    }
  }

  // --- jacobi grid
  if (doc.contains("jacobi")) {
    const json& jj = doc.at("jacobi");
    check_keys(jj, "jacobi", {"t_min", "t_max", "count"});
    if (jj.contains("t_min"))
      cfg.jacobi.t_min = get_number(jj.at("t_min"), "jacobi.t_min");
    if (jj.contains("t_max"))
      cfg.jacobi.t_max = get_number(jj.at("t_max"), "jacobi.t_max");
    if (jj.contains("count"))
      cfg.jacobi.count = get_int(jj.at("count"), "jacobi.count");
    if (!(cfg.jacobi.t_min < cfg.jacobi.t_max))
      throw config_error("config: jacobi.t_min must be < jacobi.t_max");
    if (cfg.jacobi.count < 2 || cfg.jacobi.count > 100000)
      throw config_error("config: jacobi.count must lie in [2, 100000]");
  }

  if (doc.contains("output_prefix"))
    cfg.output_prefix = get_string(doc.at("output_prefix"), "output_prefix");

  // --- cross-field rules
  if (cfg.leaf_grid && cfg.mode != "foliated")
    throw config_error(
        "config: leaf_grid sweeps require a foliation-preserving "
        "perturbation (mode 'foliated')");
  if (!cfg.custom && cfg.leaf_c.empty() && cfg.n > 2)
    throw config_error("config: missing 'leaf'");

  validate_expressions(cfg);
  return cfg;
}

namespace {

// Parses every expression field once so malformed configs fail at load time.
void validate_expressions(const experiment_config& cfg) {
  const variable_context chart_vars = chart_variables(cfg.n);
  const variable_context coeff_vars = coefficient_variables();
  const variable_context ambient_vars = ambient_variables(cfg.n);

  if (cfg.custom) {
    const custom_system_config& cs = *cfg.custom_system;
    for (std::size_t i = 0; i < cs.casimirs.size(); ++i)
      checked_expression(cs.casimirs[i], ambient_vars,
                         "system.casimirs[" + std::to_string(i) + "]");
    checked_expression(cs.hamiltonian, ambient_vars, "system.hamiltonian");
    checked_expression(cs.nu, ambient_vars, "system.nu");
    for (std::size_t i = 0; i < cs.rhs.size(); ++i)
      checked_expression(cs.rhs[i], ambient_vars,
                         "system.rhs[" + std::to_string(i) + "]");
  }
  if (cfg.polynomial) {
    for (const auto& [key, src] : cfg.polynomial->r)
      checked_expression(src, coeff_vars, "perturbation.polynomial.r." + key);
    for (const auto& [key, src] : cfg.polynomial->s)
      checked_expression(src, coeff_vars, "perturbation.polynomial.s." + key);
  } else if (cfg.mode == "foliated") {
    if (!cfg.q1.empty()) checked_expression(cfg.q1, chart_vars, "perturbation.q1");
    if (!cfg.q2.empty()) checked_expression(cfg.q2, chart_vars, "perturbation.q2");
  } else {
    if (!cfg.p1.empty()) checked_expression(cfg.p1, chart_vars, "perturbation.p1");
    if (!cfg.p2.empty()) checked_expression(cfg.p2, chart_vars, "perturbation.p2");
    for (std::size_t i = 0; i < cfg.r.size(); ++i)
      for (std::size_t j = 0; j < cfg.r[i].size(); ++j)
        checked_expression(cfg.r[i][j], chart_vars,
                           "perturbation.r[" + std::to_string(i) + "][" +
                               std::to_string(j) + "]");
  }
}

}  // namespace

experiment_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& ex) {
    throw config_error("config: JSON parse failure in " + path + ": " +
                       ex.what());
  }
  return parse_config(doc);
}

json canonical_config(const experiment_config& cfg) {
  json doc;
  doc["schema_version"] = 1;
  json sys;
  sys["type"] = cfg.custom ? "custom" : "hyperelliptic";
  sys["n"] = cfg.n;
  if (cfg.custom) {
    sys["casimirs"] = cfg.custom_system->casimirs;
    sys["hamiltonian"] = cfg.custom_system->hamiltonian;
    sys["nu"] = cfg.custom_system->nu;
    if (!cfg.custom_system->rhs.empty()) sys["rhs"] = cfg.custom_system->rhs;
  } else {
    sys["k"] = cfg.k;
  }
  doc["system"] = std::move(sys);
  doc["signs"] = cfg.signs;
  if (!cfg.leaf_c.empty()) doc["leaf"] = json{{"c", cfg.leaf_c}};
  if (cfg.leaf_grid) {
    doc["leaf_grid"] = json{{"c_first", cfg.leaf_grid->c_first},
                            {"c_last", cfg.leaf_grid->c_last},
                            {"count", cfg.leaf_grid->count}};
  }

  json pert;
  pert["mode"] = cfg.mode;
  if (cfg.polynomial) {
    json r(json::value_t::object), s(json::value_t::object);
    for (const auto& [key, src] : cfg.polynomial->r) r[key] = src;
    for (const auto& [key, src] : cfg.polynomial->s) s[key] = src;
    pert["polynomial"] = json{{"m", cfg.polynomial->m},
                              {"r", std::move(r)},
                              {"s", std::move(s)}};
  } else if (cfg.mode == "foliated") {
    if (!cfg.q1.empty()) pert["q1"] = cfg.q1;
    if (!cfg.q2.empty()) pert["q2"] = cfg.q2;
  } else {
    if (!cfg.p1.empty()) pert["p1"] = cfg.p1;
    if (!cfg.p2.empty()) pert["p2"] = cfg.p2;
    if (!cfg.r.empty()) pert["r"] = cfg.r;
  }
  doc["perturbation"] = std::move(pert);

  if (!cfg.eps_list.empty()) doc["eps_list"] = cfg.eps_list;
  if (cfg.h_range)
    doc["h_range"] = std::vector<double>{(*cfg.h_range)[0], (*cfg.h_range)[1]};
  doc["h_samples"] = cfg.h_samples;
  doc["quadrature_points"] = cfg.quadrature_points;
  doc["tolerances"] = json{{"rel_tol", cfg.tolerances.rel_tol},
                           {"abs_tol", cfg.tolerances.abs_tol},
                           {"max_step", cfg.tolerances.max_step},
                           {"max_time", cfg.tolerances.max_time}};
  if (!cfg.verify_points.empty()) {
    json pts = json::array();
    for (const vecn& p : cfg.verify_points) pts.push_back(p);
    doc["verify"] = json{{"points", std::move(pts)}};
  }
  doc["jacobi"] = json{{"t_min", cfg.jacobi.t_min},
                       {"t_max", cfg.jacobi.t_max},
                       {"count", cfg.jacobi.count}};
  if (!cfg.output_prefix.empty()) doc["output_prefix"] = cfg.output_prefix;
  return doc;
}

namespace {

// ------------------------------------------------- experiment construction

hyperelliptic_params builtin_params(const experiment_config& cfg) {
  if (cfg.custom)
    throw config_error(
        "config: this subcommand requires the built-in system "
        "(system.type 'hyperelliptic'); custom systems support 'verify' only");
  hyperelliptic_params params;
  params.n = cfg.n;
  params.k = cfg.k;
  return params;
}

sign_tuple config_signs(const experiment_config& cfg) {
  return sign_tuple(cfg.signs.begin(), cfg.signs.end());
}

// Binds a chart-variable expression as a scalar field on chart points
// (y_1..y_n), freezing the leaf parameters c and moduli k.
scalar_field bind_chart_expression(const expression& e, int n, const vecn& c,
                                   const vecn& k) {
  scalar_field f;
  f.arity = n;
  f.eval = [e, n, c, k](const vecn& y) {
    vecn values;
    values.reserve(n + c.size() + k.size());
    values.insert(values.end(), y.begin(), y.begin() + n);
    values.insert(values.end(), c.begin(), c.end());
    values.insert(values.end(), k.begin(), k.end());
    return e.eval(values);
  };
  return f;
}

polynomial_perturbation build_polynomial(const experiment_config& cfg) {
  const polynomial_config& pc = *cfg.polynomial;
  polynomial_perturbation pp = make_polynomial_perturbation(pc.m);
  const variable_context coeff_vars = coefficient_variables();
  const double k0 = cfg.k.empty() ? 0.0 : cfg.k[0];
  const auto install =
      [&](const std::vector<std::pair<std::string, std::string>>& table,
          std::vector<std::vector<std::function<double(const vecn&)>>>& dst,
          const char* name) {
        for (const auto& [key, src] : table) {
          int i = 0, j = 0;
          std::sscanf(key.c_str(), "%d,%d", &i, &j);
          const expression e =
              checked_expression(src, coeff_vars,
                                 std::string("perturbation.polynomial.") +
                                     name + "." + key);
          dst[i][j] = [e, k0](const vecn& c) {
            return e.eval({c.empty() ? 0.0 : c[0], k0});
          };
        }
      };
  install(pc.r, pp.r, "r");
  install(pc.s, pp.s, "s");
  return pp;
}

// Chart-plane integrand fields (P_1, P_2) for one leaf.
std::pair<scalar_field, scalar_field> integrand_fields(
    const experiment_config& cfg, const leaf_coordinates& leaf) {
  const variable_context chart_vars = chart_variables(cfg.n);
  if (cfg.polynomial)
    return polynomial_fields(build_polynomial(cfg), leaf, cfg.n);
  if (cfg.mode == "foliated") {
    const expression e1 = checked_expression(cfg.q1, chart_vars, "perturbation.q1");
    const expression e2 = checked_expression(cfg.q2, chart_vars, "perturbation.q2");
    return {bind_chart_expression(e1, cfg.n, leaf.c, cfg.k),
            bind_chart_expression(e2, cfg.n, leaf.c, cfg.k)};
  }
  const expression e1 = checked_expression(cfg.p1, chart_vars, "perturbation.p1");
  const expression e2 = checked_expression(cfg.p2, chart_vars, "perturbation.p2");
  return {bind_chart_expression(e1, cfg.n, leaf.c, cfg.k),
          bind_chart_expression(e2, cfg.n, leaf.c, cfg.k)};
}

// Ambient perturbation field A for one leaf.
velocity_field ambient_perturbation(const experiment_config& cfg,
                                    const darboux_chart& chart,
                                    const leaf_coordinates& leaf) {
  const auto [p1, p2] = integrand_fields(cfg, leaf);
  if (cfg.mode == "foliated") {
    foliated_perturbation spec;
    spec.q1 = p1;
    spec.q2 = p2;
    return foliated_field(chart, spec);
  }
  leaf_perturbation spec;
  spec.p1 = p1;
  spec.p2 = p2;
  spec.leaf = leaf;
  if (!cfg.r.empty()) {
    const variable_context chart_vars = chart_variables(cfg.n);
    spec.r.resize(cfg.n - 2);
    for (int i = 0; i < cfg.n - 2; ++i)
      for (int j = 0; j < cfg.n - 2; ++j) {
        const expression e = checked_expression(
            cfg.r[i][j], chart_vars,
            "perturbation.r[" + std::to_string(i) + "][" + std::to_string(j) +
                "]");
        spec.r[i].push_back(bind_chart_expression(e, cfg.n, leaf.c, cfg.k));
      }
  }
  return leaf_fixed_field(chart, spec);
}

orbit_parameterization make_orbit(const experiment_config& cfg,
                                  const leaf_coordinates& leaf) {
  orbit_parameterization orbit =
      orbit_family(builtin_params(cfg), config_signs(cfg), leaf);
  if (cfg.h_range) {
    const double lo = std::max(orbit.h_min, (*cfg.h_range)[0]);
    const double hi = std::min(orbit.h_max, (*cfg.h_range)[1]);
    if (!(lo < hi))
      throw config_error(
          "config: h_range does not intersect the orbit family range "
          "(0, rho^2/2) of leaf c = " +
          csv_number(leaf.c.empty() ? 0.0 : leaf.c[0]));
    orbit.h_min = lo;
    orbit.h_max = hi;
  }
  if (!std::isfinite(orbit.h_max))
    throw config_error(
        "config: the orbit family range is unbounded (all moduli zero); "
        "supply a finite h_range");
  return orbit;
}

std::vector<leaf_coordinates> config_leaves(const experiment_config& cfg) {
  std::vector<leaf_coordinates> leaves;
  if (cfg.leaf_grid) {
    const leaf_grid_config& grid = *cfg.leaf_grid;
    for (int s = 0; s < grid.count; ++s) {
      const double w =
          (grid.count == 1) ? 0.0
                            : static_cast<double>(s) / (grid.count - 1);
      vecn c(grid.c_first.size());
      for (std::size_t j = 0; j < c.size(); ++j)
        c[j] = grid.c_first[j] + w * (grid.c_last[j] - grid.c_first[j]);
      leaves.push_back(leaf_coordinates{std::move(c)});
    }
  } else {
    leaves.push_back(leaf_coordinates{cfg.leaf_c});
  }
  return leaves;
}

std::string json_dump(const json& j) { return j.dump(2) + "\n"; }

// --------------------------------------------------------------- melnikov

struct leaf_scan {
  leaf_coordinates leaf;
  melnikov_curve curve;
};

std::vector<leaf_scan> scan_leaves(const experiment_config& cfg,
                                   const run_options& opt) {
  const std::vector<leaf_coordinates> leaves = config_leaves(cfg);
  std::vector<leaf_scan> scans(leaves.size());
  parallel_for(static_cast<int>(leaves.size()), opt.threads, [&](int i) {
    const leaf_coordinates& leaf = leaves[i];
    const orbit_parameterization orbit = make_orbit(cfg, leaf);
    const auto [p1, p2] = integrand_fields(cfg, leaf);
    scans[i].leaf = leaf;
    scans[i].curve =
        melnikov_scan(orbit, p1, p2, cfg.h_samples, cfg.quadrature_points);
  });
  return scans;
}

json zeros_json(const std::vector<leaf_scan>& scans) {
  json leaves = json::array();
  for (const leaf_scan& s : scans) {
    json zeros = json::array();
    for (const melnikov_zero& z : s.curve.zeros)
      zeros.push_back(json{{"h", z.h},
                           {"simple", z.simple},
                           {"derivative", finite_or(z.derivative, 0.0)}});
    leaves.push_back(json{{"c", s.leaf.c},
                          {"h_min", s.curve.h_min},
                          {"h_max", s.curve.h_max},
                          {"all_zero", s.curve.all_zero},
                          {"scale", finite_or(s.curve.scale, 0.0)},
                          {"zeros", std::move(zeros)}});
  }
  return json{{"schema_version", 1}, {"leaves", std::move(leaves)}};
}

std::string melnikov_csv(const std::vector<leaf_scan>& scans, int n) {
  std::ostringstream out;
  for (int j = 1; j <= n - 2; ++j) out << "c" << j << ",";
  out << "h,I\n";
  for (const leaf_scan& s : scans)
    for (const auto& [h, value] : s.curve.samples) {
      for (const double c : s.leaf.c) out << csv_number(c) << ",";
      out << csv_number(h) << "," << csv_number(value) << "\n";
    }
  return out.str();
}

}  // namespace

int run_melnikov(const experiment_config& cfg, const run_options& opt) {
  const std::vector<leaf_scan> scans = scan_leaves(cfg, opt);

  write_text_file(output_path(opt, cfg, "melnikov.csv"),
                  melnikov_csv(scans, cfg.n));
  write_text_file(output_path(opt, cfg, "zeros.json"),
                  json_dump(zeros_json(scans)));

  bool any_nonzero = false;
  std::size_t zero_count = 0;
  for (const leaf_scan& s : scans) {
    if (!s.curve.all_zero) any_nonzero = true;
    zero_count += s.curve.zeros.size();
    std::cout << "leaf c = [";
    for (std::size_t j = 0; j < s.leaf.c.size(); ++j)
      std::cout << (j ? ", " : "") << s.leaf.c[j];
    std::cout << "]: "
              << (s.curve.all_zero
                      ? "first-order curve identically zero"
                      : std::to_string(s.curve.zeros.size()) +
                            " isolated zero(s)")
              << "\n";
  }
  if (!any_nonzero) {
    std::cerr << "melnikov: the first-order displacement integral vanishes "
                 "identically on every sampled leaf; the isolation "
                 "hypothesis (I not identically zero) fails and no zero can "
                 "be isolated\n";
    return 2;
  }
  std::cout << "melnikov: " << zero_count << " isolated zero(s) across "
            << scans.size() << " leaf/leaves\n";
  return 0;
}

// -------------------------------------------------------------------- hunt

namespace {

json cycle_entry_json(const convergence_entry& e) {
  json out;
  out["eps"] = e.eps;
  out["ok"] = e.ok;
  if (!e.ok) {
    out["message"] = e.message;
    return out;
  }
  const limit_cycle_report& r = e.report;
  out["h_eps"] = finite_or(r.h_eps, 0.0);
  out["period"] = finite_or(r.period, 0.0);
  out["return_slope"] = finite_or(r.return_slope, 0.0);
  out["hausdorff_to_source"] = finite_or(r.hausdorff_to_source, 0.0);
  json pts = json::array();
  for (const vecn& p : r.cycle_points) pts.push_back(p);
  out["cycle"] = std::move(pts);
  return out;
}

}  // namespace

int run_hunt(const experiment_config& cfg, const run_options& opt) {
  if (cfg.eps_list.empty())
    throw config_error("config: hunt requires a non-empty eps_list");
  if (cfg.leaf_grid)
    throw config_error("config: hunt runs on a single leaf (no leaf_grid)");

  const std::vector<leaf_scan> scans = scan_leaves(cfg, opt);
  const leaf_scan& scan = scans.front();
  if (scan.curve.all_zero) {
    std::cerr << "hunt: the first-order displacement integral vanishes "
                 "identically on this leaf; no zeros to continue from\n";
    return 2;
  }
  if (scan.curve.zeros.empty()) {
    std::cerr << "hunt: no isolated first-order zeros on this leaf; nothing "
                 "to continue\n";
    return 3;
  }

  const leaf_coordinates leaf = scan.leaf;
  const orbit_parameterization orbit = make_orbit(cfg, leaf);
  const darboux_chart& chart = *orbit.chart;
  const velocity_field base = realized_field(chart.sys);
  const velocity_field pert = ambient_perturbation(cfg, chart, leaf);
  const auto family = [&base, &pert](double eps) {
    return perturbed_field(base, pert, eps);
  };

  const std::vector<melnikov_zero>& zeros = scan.curve.zeros;
  std::vector<convergence_report> reports(zeros.size());
  std::vector<std::string> zero_status(zeros.size());
  parallel_for(static_cast<int>(zeros.size()), opt.threads, [&](int i) {
    if (!zeros[i].simple) {
      zero_status[i] = "skipped: zero not classified as simple";
      return;
    }
    reports[i] = convergence_study(family, orbit, zeros[i].h, cfg.eps_list,
                                   cfg.tolerances);
  });

  // CSV: one row per (zero, eps).
  std::ostringstream csv;
  csv << "h_star,eps,h_eps,period,return_slope,hausdorff,status\n";
  json jzeros = json::array();
  int successes = 0;
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    json jz;
    jz["h_star"] = zeros[i].h;
    jz["simple"] = zeros[i].simple;
    if (!zero_status[i].empty()) {
      jz["status"] = zero_status[i];
      csv << csv_number(zeros[i].h) << ",,,,,," << csv_safe(zero_status[i])
          << "\n";
      jzeros.push_back(std::move(jz));
      continue;
    }
    const convergence_report& rep = reports[i];
    json entries = json::array();
    for (const convergence_entry& e : rep.entries) {
      entries.push_back(cycle_entry_json(e));
      csv << csv_number(zeros[i].h) << "," << csv_number(e.eps) << ",";
      if (e.ok) {
        ++successes;
        csv << csv_number(e.report.h_eps) << "," << csv_number(e.report.period)
            << "," << csv_number(e.report.return_slope) << ","
            << csv_number(e.report.hausdorff_to_source) << ",ok\n";
      } else {
        csv << ",,,," << csv_safe(e.message) << "\n";
      }
    }
    jz["cycles"] = std::move(entries);
    jz["decay_ratios"] = rep.decay_ratios;
    jz["non_bifurcating"] = rep.non_bifurcating;
    jzeros.push_back(std::move(jz));
  }

  write_text_file(output_path(opt, cfg, "hunt.csv"), csv.str());
  write_text_file(
      output_path(opt, cfg, "cycles.json"),
      json_dump(json{{"schema_version", 1}, {"zeros", std::move(jzeros)}}));

  std::cout << "hunt: " << successes << " confirmed cycle(s) across "
            << zeros.size() << " first-order zero(s) and "
            << cfg.eps_list.size() << " eps value(s)\n";
  return successes > 0 ? 0 : 3;
}

// ------------------------------------------------------------------ verify

namespace {

struct group_result {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double residual = 0.0;  // worst measured residual (finite)
  double threshold = 0.0;
  std::string detail;
};

json group_json(const group_result& g) {
  json out;
  out["name"] = g.name;
  out["applicable"] = g.applicable;
  out["passed"] = g.passed;
  if (g.applicable) {
    out["residual"] = finite_or(g.residual, -1.0);
    out["threshold"] = g.threshold;
  }
  if (!g.detail.empty()) out["detail"] = g.detail;
  return out;
}

double norm_inf(const vecn& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Random ambient points in the chart source orthant of the built-in system.
std::vector<vecn> orthant_points(const experiment_config& cfg,
                                 std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> plane(-0.9, 0.9);
  std::uniform_real_distribution<double> radial(0.4, 1.6);
  std::vector<vecn> pts;
  for (int s = 0; s < count; ++s) {
    vecn x(cfg.n);
    x[0] = plane(rng);
    x[1] = plane(rng);
    for (int j = 0; j < cfg.n - 2; ++j)
      x[j + 2] = static_cast<double>(cfg.signs[j]) * radial(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

// Random chart-image points on the configured leaf.
std::vector<vecn> image_points(const experiment_config& cfg,
                               const leaf_coordinates& leaf, double disc_radius,
                               std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> radius(0.1 * disc_radius,
                                                0.9 * disc_radius);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::vector<vecn> pts;
  for (int s = 0; s < count; ++s) {
    vecn y(cfg.n);
    const double r = radius(rng);
    const double phi = angle(rng);
    y[0] = r * std::cos(phi);
    y[1] = r * std::sin(phi);
    for (int j = 0; j < cfg.n - 2; ++j) y[j + 2] = leaf.c[j];
    pts.push_back(std::move(y));
  }
  return pts;
}

group_result verify_nambu(const experiment_config& cfg,
                          const integrable_system& sys,
                          const std::vector<vecn>& points) {
  group_result g;
  g.name = "nambu_realization";
  g.threshold = cfg.custom ? 1e-6 : 1e-9;
  double worst = 0.0;
  for (const vecn& x : points) {
    const vecn fx = vector_field_at(sys, x);
    const double scale = 1.0 + norm_inf(fx);
    const vecn gh = gradient(sys.hamiltonian, x);
    double dot_h = 0.0;
    for (int i = 0; i < sys.n; ++i) dot_h += gh[i] * fx[i];
    worst = std::max(worst, std::abs(dot_h) / scale);
    for (const scalar_field& c : sys.casimirs) {
      const vecn gc = gradient(c, x);
      double dot_c = 0.0;
      for (int i = 0; i < sys.n; ++i) dot_c += gc[i] * fx[i];
      worst = std::max(worst, std::abs(dot_c) / scale);
    }
  }
  g.residual = worst;
  g.passed = worst <= g.threshold;
  g.detail = "first integrals orthogonal to the realized field";
  return g;
}

// Custom systems may supply a reference right-hand side; the realized field
// must reproduce it (this catches an inconsistent rescaling nu).
group_result verify_nambu_rhs(const experiment_config& cfg,
                              const integrable_system& sys,
                              const std::vector<vecn>& points) {
  group_result g;
  g.name = "nambu_realization_rhs";
  g.threshold = 1e-6;
  const custom_system_config& cs = *cfg.custom_system;
  const variable_context vars = ambient_variables(cfg.n);
  std::vector<expression> rhs;
  for (const std::string& src : cs.rhs)
    rhs.push_back(checked_expression(src, vars, "system.rhs"));
  double worst = 0.0;
  for (const vecn& x : points) {
    const vecn fx = vector_field_at(sys, x);
    double scale = 1.0 + norm_inf(fx);
    for (int i = 0; i < cfg.n; ++i)
      worst = std::max(worst, std::abs(fx[i] - rhs[i].eval(x)) / scale);
  }
  g.residual = worst;
  g.passed = worst <= g.threshold;
  g.detail = "realized field matches the declared right-hand side";
  return g;
}

group_result verify_chart(const experiment_config& cfg,
                          const darboux_chart& chart,
                          const leaf_coordinates& leaf, double disc_radius,
                          std::mt19937_64& rng) {
  group_result g;
  g.name = "darboux_chart";
  g.threshold = 1e-6;
  const std::vector<vecn> pts = image_points(cfg, leaf, disc_radius, rng, 100);
  const chart_audit_report audit = chart_audit(chart, pts);
  const darboux_report normal_form = darboux_residual(chart, pts);

  double worst = std::max(audit.max_roundtrip_error, normal_form.max_residual);
  std::string detail = "jacobian, roundtrip, rescaling sign, normal form";
  bool ok = audit.nu_phi_sign_constant && audit.min_abs_jacobian > 1e-12 &&
            audit.min_abs_nu_phi > 1e-12;
  if (!audit.nu_phi_sign_constant) detail = "nu_Phi changes sign on the sample";

  // Config-supplied ambient audit points: they must live in the declared
  // source orthant and must round-trip through the chart.
  for (const vecn& x : cfg.verify_points) {
    if (!chart.source_contains(x)) {
      ok = false;
      detail = "audit point outside the declared source orthant Omega'";
      continue;
    }
    const vecn back = inverse(chart, forward(chart, x));
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i)
      err = std::max(err, std::abs(back[i] - x[i]));
    worst = std::max(worst, err / (1.0 + norm_inf(x)));
  }

  g.residual = worst;
  g.passed = ok && worst <= g.threshold;
  g.detail = detail;
  return g;
}

group_result verify_tangency(const experiment_config& cfg,
                             const integrable_system& sys,
                             const darboux_chart& chart,
                             const leaf_coordinates& leaf,
                             std::mt19937_64& rng) {
  group_result g;
  g.name = "perturbation_tangency";
  g.threshold = 1e-9;
  const velocity_field a = ambient_perturbation(cfg, chart, leaf);

  // Sample ambient points across nearby leaves (the foliated identity holds
  // off the configured leaf too; the leaf-fixed identity is the R-form).
  std::uniform_real_distribution<double> scale_c(0.6, 1.4);
  std::vector<vecn> pts;
  for (int s = 0; s < 60; ++s) {
    vecn c(leaf.c.size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = leaf.c[j] * scale_c(rng);
    hyperelliptic_params params = builtin_params(cfg);
    const double disc = rho(params, leaf_coordinates{c});
    const std::vector<vecn> ys =
        image_points(cfg, leaf_coordinates{c}, disc, rng, 1);
    pts.push_back(inverse(chart, ys.front()));
  }

  double worst = 0.0;
  if (cfg.mode == "foliated") {
    worst = foliation_tangency(sys, a, pts);
    g.detail = "perturbation tangent to every sampled leaf";
  } else {
    leaf_perturbation spec;
    const auto [p1, p2] = integrand_fields(cfg, leaf);
    spec.p1 = p1;
    spec.p2 = p2;
    spec.leaf = leaf;
    if (!cfg.r.empty()) {
      const variable_context chart_vars = chart_variables(cfg.n);
      spec.r.resize(cfg.n - 2);
      for (int i = 0; i < cfg.n - 2; ++i)
        for (int j = 0; j < cfg.n - 2; ++j)
          spec.r[i].push_back(bind_chart_expression(
              checked_expression(cfg.r[i][j], chart_vars, "perturbation.r"),
              cfg.n, leaf.c, cfg.k));
    }
    worst = leaf_tangency(chart, a, spec, pts);
    g.detail = "leaf-fixed tangency identity (R-form)";
  }
  g.residual = worst;
  g.passed = worst <= g.threshold;
  return g;
}

group_result verify_melnikov_closed_form(const experiment_config& cfg,
                                         const leaf_coordinates& leaf) {
  group_result g;
  g.name = "melnikov_closed_form";
  if (!cfg.polynomial) {
    g.applicable = false;
    g.detail = "polynomial representation not in use";
    return g;
  }
  g.threshold = 1e-8;
  const orbit_parameterization orbit = make_orbit(cfg, leaf);
  const polynomial_perturbation pp = build_polynomial(cfg);
  const melnikov_polynomial closed = polynomial_melnikov(pp, leaf);
  const auto [p1, p2] = integrand_fields(cfg, leaf);
  double worst = 0.0;
  for (int s = 1; s <= 7; ++s) {
    const double h =
        orbit.h_min + (orbit.h_max - orbit.h_min) * s / 8.0;
    const double by_quadrature =
        melnikov_integral(orbit, p1, p2, h, cfg.quadrature_points);
    const double by_formula = closed.eval(h);
    worst = std::max(worst, std::abs(by_quadrature - by_formula) /
                                (1.0 + std::abs(by_formula)));
  }
  g.residual = worst;
  g.passed = worst <= g.threshold;
  g.detail = "closed-form odd polynomial vs periodic quadrature";
  return g;
}

group_result verify_orientation(const experiment_config& cfg,
                                const leaf_coordinates& leaf) {
  group_result g;
  g.name = "orientation_consistency";
  g.threshold = 0.0;
  const orbit_parameterization orbit = make_orbit(cfg, leaf);
  const velocity_field base = realized_field(orbit.chart->sys);
  int sigma0 = 0;
  bool constant = true;
  for (const double w : {0.25, 0.5, 0.75}) {
    const double h = orbit.h_min + w * (orbit.h_max - orbit.h_min);
    const int sigma = orbit_orientation(base, orbit, h);
    if (sigma0 == 0)
      sigma0 = sigma;
    else if (sigma != sigma0)
      constant = false;
  }
  g.passed = constant && sigma0 != 0;
  g.residual = 0.0;
  g.detail = "measured flow orientation sigma = " + std::to_string(sigma0) +
             " (displacement law: delta ~ eps * sigma * I)";
  return g;
}

group_result verify_jacobi(const experiment_config& cfg) {
  group_result g;
  g.name = "jacobi_identities";
  g.threshold = 1e-6;  // inversion scale; identities are held to 1e-8 below
  hyperelliptic_params params = builtin_params(cfg);
  const velocity_field field = realized_field(build_system(params));
  vecn x0(cfg.n, 1.0);
  x0[0] = 0.0;
  const trajectory traj = integrate(field, x0, 5.0, cfg.tolerances);

  double worst_identity = 0.0;
  for (int s = 0; s <= 25; ++s) {
    const vecn x = traj.at(5.0 * s / 25.0);
    worst_identity =
        std::max(worst_identity, std::abs(x[0] * x[0] + x[1] * x[1] - 1.0));
    for (int j = 0; j < cfg.n - 2; ++j)
      worst_identity = std::max(
          worst_identity, std::abs(params.k[j] * params.k[j] * x[0] * x[0] +
                                   x[j + 2] * x[j + 2] - 1.0));
  }

  const double branch = monotonic_branch_end(params, cfg.tolerances);
  double worst_inversion = 0.0;
  for (const double w : {0.4, 0.8}) {
    const double t = w * std::min(branch, 2.0);
    if (t <= 0.0) continue;
    worst_inversion =
        std::max(worst_inversion,
                 inversion_check(params, t, cfg.tolerances, branch).residual);
  }

  g.residual = std::max(worst_inversion, worst_identity);
  g.passed = worst_identity <= 1e-8 && worst_inversion <= 1e-6;
  g.detail = "first-integral identities and hyperelliptic inversion";
  return g;
}

integrable_system build_custom_system(const experiment_config& cfg) {
  const custom_system_config& cs = *cfg.custom_system;
  const variable_context vars = ambient_variables(cfg.n);
  integrable_system sys;
  sys.n = cfg.n;
  for (std::size_t i = 0; i < cs.casimirs.size(); ++i)
    sys.casimirs.push_back(field_from_expression(
        checked_expression(cs.casimirs[i], vars, "system.casimirs"), cfg.n));
  sys.hamiltonian = field_from_expression(
      checked_expression(cs.hamiltonian, vars, "system.hamiltonian"), cfg.n);
  sys.rescale = field_from_expression(
      checked_expression(cs.nu, vars, "system.nu"), cfg.n);
  sys.in_domain = {};
  return sys;
}

}  // namespace

int run_verify(const experiment_config& cfg, const run_options& opt) {
  std::mt19937_64 rng(opt.seed);
  std::vector<group_result> groups;

  if (cfg.custom) {
    const integrable_system sys = build_custom_system(cfg);
    // Sample points away from coordinate planes where expression-defined
    // gradients are finite-difference friendly.
    std::vector<vecn> pts;
    std::uniform_real_distribution<double> box(0.5, 1.5);
    for (int s = 0; s < 100; ++s) {
      vecn x(cfg.n);
      for (int i = 0; i < cfg.n; ++i) x[i] = box(rng);
      pts.push_back(std::move(x));
    }
    groups.push_back(verify_nambu(cfg, sys, pts));
    if (!cfg.custom_system->rhs.empty())
      groups.push_back(verify_nambu_rhs(cfg, sys, pts));
    group_result rest;
    rest.name = "darboux_chart";
    rest.applicable = false;
    rest.detail = "custom systems verify the Nambu realization only";
    groups.push_back(rest);
  } else {
    const hyperelliptic_params params = builtin_params(cfg);
    const sign_tuple signs = config_signs(cfg);
    const leaf_coordinates leaf{cfg.leaf_c};
    const integrable_system sys = build_system(params);
    const darboux_chart chart = build_chart(params, signs);
    const double disc_radius = rho(params, leaf);

    groups.push_back(verify_nambu(cfg, sys, orthant_points(cfg, rng, 100)));
    groups.push_back(verify_chart(cfg, chart, leaf, disc_radius, rng));
    groups.push_back(verify_tangency(cfg, sys, chart, leaf, rng));
    groups.push_back(verify_melnikov_closed_form(cfg, leaf));
    groups.push_back(verify_orientation(cfg, leaf));
    groups.push_back(verify_jacobi(cfg));
  }

  bool all_passed = true;
  json jgroups = json::array();
  for (const group_result& g : groups) {
    jgroups.push_back(group_json(g));
    if (g.applicable && !g.passed) all_passed = false;
    std::cout << (g.applicable ? (g.passed ? "[PASS] " : "[FAIL] ")
                               : "[SKIP] ")
              << g.name;
    if (g.applicable)
      std::cout << " (residual " << csv_number(g.residual) << ", threshold "
                << csv_number(g.threshold) << ")";
    if (!g.detail.empty()) std::cout << " - " << g.detail;
    std::cout << "\n";
  }

  write_text_file(output_path(opt, cfg, "verify.json"),
                  json_dump(json{{"schema_version", 1},
                                 {"groups", std::move(jgroups)},
                                 {"passed", all_passed}}));
  return all_passed ? 0 : 4;
}

// ------------------------------------------------------------------ jacobi

int run_jacobi(const experiment_config& cfg, const run_options& opt) {
  const hyperelliptic_params params = builtin_params(cfg);
  const velocity_field field = realized_field(build_system(params));
  vecn x0(cfg.n, 1.0);
  x0[0] = 0.0;

  const double t_min = cfg.jacobi.t_min;
  const double t_max = cfg.jacobi.t_max;
  const int count = cfg.jacobi.count;

  trajectory forward_traj, backward_traj;
  if (t_max > 0.0) forward_traj = integrate(field, x0, t_max, cfg.tolerances);
  if (t_min < 0.0) backward_traj = integrate(field, x0, t_min, cfg.tolerances);
  const auto state_at = [&](double t) -> vecn {
    if (t > 0.0 && t_max > 0.0) return forward_traj.at(t);
    if (t < 0.0 && t_min < 0.0) return backward_traj.at(t);
    return x0;
  };

  const double branch = monotonic_branch_end(params, cfg.tolerances);

  std::ostringstream csv;
  csv << "t,sn,cn";
  for (int j = 1; j <= cfg.n - 2; ++j) csv << ",dn" << j;
  csv << ",res_H";
  for (int j = 1; j <= cfg.n - 2; ++j) csv << ",res_C" << j;
  csv << ",inversion_residual\n";

  double worst_identity = 0.0;
  for (int s = 0; s < count; ++s) {
    const double t = t_min + (t_max - t_min) * s / (count - 1);
    const vecn x = state_at(t);
    csv << csv_number(t);
    for (int i = 0; i < cfg.n; ++i) csv << "," << csv_number(x[i]);
    const double res_h = std::abs(x[0] * x[0] + x[1] * x[1] - 1.0);
    csv << "," << csv_number(res_h);
    worst_identity = std::max(worst_identity, res_h);
    for (int j = 0; j < cfg.n - 2; ++j) {
      const double res_c = std::abs(params.k[j] * params.k[j] * x[0] * x[0] +
                                    x[j + 2] * x[j + 2] - 1.0);
      csv << "," << csv_number(res_c);
      worst_identity = std::max(worst_identity, res_c);
    }
    if (std::abs(t) < branch) {
      const inversion_report inv =
          inversion_check(params, t, cfg.tolerances, branch);
      csv << "," << csv_number(inv.residual) << "\n";
    } else {
      csv << ",\n";  // outside the monotonic branch
    }
  }

  write_text_file(output_path(opt, cfg, "jacobi.csv"), csv.str());
  std::cout << "jacobi: " << count << " grid rows over [" << t_min << ", "
            << t_max << "], worst identity residual "
            << csv_number(worst_identity) << "\n";
  return 0;
}

}  // namespace leafcycle::cli
