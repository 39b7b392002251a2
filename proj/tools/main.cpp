// leafcycle command-line driver.
// Part of the leafcycle library. MIT license; see LICENSE.
//
// Subcommands:
//   melnikov  sample the first-order displacement integral and isolate zeros
//   hunt      continue each simple zero to numerically confirmed limit cycles
//   verify    run the structural verification groups
//   jacobi    tabulate the hyperelliptic functions along the flow
//
// Common flags: --config PATH (required), --out DIR, --seed N, --threads N,
// --dump-config (print the canonical configuration and exit).

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "runner.hpp"

namespace {

struct subcommand_options {
  std::string config_path;
  leafcycle::cli::run_options run;
  bool dump_config = false;
};

void add_common_flags(CLI::App* cmd, subcommand_options& opt) {
  cmd->add_option("--config", opt.config_path, "experiment configuration (JSON)")
      ->required();
  cmd->add_option("--out", opt.run.out_dir,
                  "output directory (created if missing)")
      ->capture_default_str();
  cmd->add_option("--seed", opt.run.seed, "seed for randomized verification")
      ->capture_default_str();
  cmd->add_option("--threads", opt.run.threads, "worker thread count")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  cmd->add_flag("--dump-config", opt.dump_config,
                "print the canonical configuration and exit");
}

int dispatch(const std::string& name, const subcommand_options& opt) {
  using namespace leafcycle::cli;
  const experiment_config cfg = load_config(opt.config_path);
  if (opt.dump_config) {
    std::cout << canonical_config(cfg).dump(2) << "\n";
    return 0;
  }
  std::filesystem::create_directories(opt.run.out_dir);
  if (name == "melnikov") return run_melnikov(cfg, opt.run);
  if (name == "hunt") return run_hunt(cfg, opt.run);
  if (name == "verify") return run_verify(cfg, opt.run);
  return run_jacobi(cfg, opt.run);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "leafcycle: limit-cycle bifurcation analysis for perturbed "
      "integrable systems"};
  app.require_subcommand(1);

  subcommand_options opt;
  const char* names[] = {"melnikov", "hunt", "verify", "jacobi"};
  const char* blurbs[] = {
      "sample the first-order displacement integral and isolate its zeros",
      "continue simple zeros to numerically confirmed limit cycles",
      "run the structural verification groups",
      "tabulate the hyperelliptic functions along the flow"};
  for (int i = 0; i < 4; ++i)
    add_common_flags(app.add_subcommand(names[i], blurbs[i]), opt);

  CLI11_PARSE(app, argc, argv);

  const std::string chosen = app.get_subcommands().front()->get_name();
  try {
    return dispatch(chosen, opt);
  } catch (const leafcycle::cli::config_error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
