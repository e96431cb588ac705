// graddiv-ns: experiment runner for the grad-div Navier-Stokes solver.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graddiv/experiment.hpp"

using namespace graddiv;

namespace {

constexpr int kExitUsage = 2;

int cmd_presets() {
  for (const auto& p : presets()) {
    std::cout << p.name << "\n  " << p.description << "\n  " << p.command << "\n";
  }
  return 0;
}

int cmd_check() {
  int failed = 0;
  for (const auto& r : run_checks()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    failed += r.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grad-div stabilized Navier-Stokes experiments on the unit square"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and write CSV/SVG results");
  std::string config_file;
  run->add_option("--config", config_file, "key=value file; command-line flags override it")->check(CLI::ExistingFile);

  // Flag name -> raw value; applied after the config file.
  std::map<std::string, std::string> flags;
  const std::vector<std::pair<std::string, std::string>> options{
      {"experiment", "nu_sweep | refinement | temporal_order | inf_sup_scan | stokes_projection_scan | single_run"},
      {"pair", "taylor_hood | mini"},
      {"levels", "mesh levels, e.g. 3..7 or 3,4,5"},
      {"nu", "comma-separated viscosities"},
      {"mu", "grad-div parameter"},
      {"dt", "comma-separated time steps"},
      {"t-end", "final time"},
      {"scheme", "be | cn"},
      {"initial", "interpolant | stokes"},
      {"method", "picard | newton"},
      {"tol", "relative increment tolerance of the nonlinear solver"},
      {"max-iter", "nonlinear iteration budget per step"},
      {"damping", "nonlinear damping factor in (0, 1]"},
      {"lagged", "reuse factorizations across nonlinear iterations (true | false)"},
      {"output", "output directory"},
      {"threads", "worker threads (default: GRADDIV_NS_THREADS or all cores)"},
  };
  std::map<std::string, CLI::Option*> opts;
  for (const auto& [name, help] : options) opts[name] = run->add_option("--" + name, flags[name], help);
  run->add_option("--level", flags["level"], "alias of --levels");
  bool verbose = false;
  run->add_flag("-v,--verbose", verbose, "log nonlinear iterations");

  app.add_subcommand("presets", "list the study presets");
  app.add_subcommand("check", "run the fast invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  if (app.got_subcommand("presets")) return cmd_presets();
  if (app.got_subcommand("check")) return cmd_check();

  ExperimentConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream is(config_file);
      apply_config_file(cfg, is);
    }
    for (const auto& [name, value] : flags)
      if (run->count("--" + name) > 0) apply_setting(cfg, name, value);
    if (verbose) cfg.nonlinear.verbose = true;
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "graddiv-ns: " << e.what() << "\n" << run->help();
    return kExitUsage;
  }

  try {
    const ExperimentOutcome out = run_experiment(cfg, std::cerr);
    for (const auto& f : out.files) std::cout << f << '\n';
    if (out.exit_code != 0) std::cerr << "graddiv-ns: " << out.failure << '\n';
    return out.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "graddiv-ns: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "graddiv-ns: " << e.what() << '\n';
    return 1;
  }
}
