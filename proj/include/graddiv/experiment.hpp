#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "graddiv/solver.hpp"
#include "graddiv/timestepping.hpp"
#include "graddiv/verification.hpp"

namespace graddiv {

enum class ExperimentKind { NuSweep, Refinement, TemporalOrder, InfSupScan, StokesProjectionScan, SingleRun };

std::string experiment_name(ExperimentKind k);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SingleRun;
  PairTag pair = PairTag::TaylorHood21;
  std::vector<int> levels{3};
  std::vector<double> nu_values{1.0};
  double mu = 0.25;
  std::vector<double> dt_values{0.0625};
  double t_end = 5.0;
  Scheme scheme = Scheme::CrankNicolson;
  InitialCondition initial = InitialCondition::LagrangeInterpolant;
  NonlinearConfig nonlinear{.reuse_factorization = true};
  std::string output_dir = "results";
  int threads = 0;  // 0: GRADDIV_NS_THREADS or the hardware concurrency

  /// Throws ConfigError.
  void validate() const;
};

/// "3..7", "3,4,5" or "4".
std::vector<int> parse_levels(const std::string& text);
/// Comma-separated reals.
std::vector<double> parse_reals(const std::string& text);

/// One `key = value` setting; keys use the long flag names (levels, nu, dt,
/// t-end, ...). Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// key=value lines, '#' starts a comment.
void apply_config_file(ExperimentConfig& cfg, std::istream& is);

struct Preset {
  std::string name;
  std::string description;
  std::string command;
  ExperimentConfig config;
};
const std::vector<Preset>& presets();

/// Fixed column order of results.csv.
const std::vector<std::string>& results_columns();
void write_results_csv(std::ostream& os, const std::vector<ErrorReport>& rows);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok, 3 solver failure
  std::vector<ErrorReport> reports;
  std::vector<std::string> files;
  std::string failure;
};

/// Runs the sweep, writes results.csv, rates.csv and SVG plots into
/// cfg.output_dir. Rows are written in config order: levels, then nu, then dt.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Worker count: explicit value, else GRADDIV_NS_THREADS, else hardware.
int worker_count(int requested, int jobs);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite behind `graddiv-ns check`.
std::vector<CheckResult> run_checks();

}  // namespace graddiv
