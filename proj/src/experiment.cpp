#include "graddiv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "graddiv/svg.hpp"

namespace graddiv {

namespace fs = std::filesystem;

std::string experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::NuSweep: return "nu_sweep";
    case ExperimentKind::Refinement: return "refinement";
    case ExperimentKind::TemporalOrder: return "temporal_order";
    case ExperimentKind::InfSupScan: return "inf_sup_scan";
    case ExperimentKind::StokesProjectionScan: return "stokes_projection_scan";
    case ExperimentKind::SingleRun: return "single_run";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

bool is_transient(ExperimentKind k) {
  return k != ExperimentKind::InfSupScan && k != ExperimentKind::StokesProjectionScan;
}

}  // namespace

std::vector<int> parse_levels(const std::string& text) {
  const std::string t = trim(text);
  std::vector<int> out;
  if (t.empty()) return out;
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const int lo = parse_int(trim(t.substr(0, dots)));
    const int hi = parse_int(trim(t.substr(dots + 2)));
    if (hi < lo) throw ConfigError("empty level range '" + t + "'");
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
  }
  for (const auto& item : split(t, ',')) out.push_back(parse_int(item));
  return out;
}

std::vector<double> parse_reals(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.empty()) return out;
  for (const auto& item : split(t, ',')) out.push_back(parse_real(item));
  return out;
}

void ExperimentConfig::validate() const {
  if (levels.empty()) throw ConfigError("no mesh levels given");
  for (int l : levels)
    if (l < 0 || l > 9) throw ConfigError("mesh level " + std::to_string(l) + " outside 0..9");
  if (experiment == ExperimentKind::InfSupScan) return;
  if (nu_values.empty()) throw ConfigError("no viscosities given");
  for (double nu : nu_values)
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("viscosity must be positive");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be nonnegative");
  if (output_dir.empty()) throw ConfigError("empty output directory");
  if (!is_transient(experiment)) return;
  if (dt_values.empty()) throw ConfigError("no time steps given");
  for (double dt : dt_values) {
    SchemeConfig s;
    s.dt = dt;
    s.t_end = t_end;
    try {
      s.n_steps();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    nonlinear.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string value = trim(raw_value);
  if (key == "experiment") {
    static const std::map<std::string, ExperimentKind> kinds{
        {"nu_sweep", ExperimentKind::NuSweep},
        {"refinement", ExperimentKind::Refinement},
        {"temporal_order", ExperimentKind::TemporalOrder},
        {"inf_sup_scan", ExperimentKind::InfSupScan},
        {"stokes_projection_scan", ExperimentKind::StokesProjectionScan},
        {"single_run", ExperimentKind::SingleRun}};
    const auto it = kinds.find(value);
    if (it == kinds.end()) throw ConfigError("unknown experiment '" + value + "'");
    cfg.experiment = it->second;
  } else if (key == "pair") {
    if (value == "taylor_hood" || value == "th")
      cfg.pair = PairTag::TaylorHood21;
    else if (value == "mini")
      cfg.pair = PairTag::Mini11;
    else
      throw ConfigError("unknown element pair '" + value + "'");
  } else if (key == "levels" || key == "level") {
    cfg.levels = parse_levels(value);
  } else if (key == "nu") {
    cfg.nu_values = parse_reals(value);
  } else if (key == "mu") {
    cfg.mu = parse_real(value);
  } else if (key == "dt") {
    cfg.dt_values = parse_reals(value);
  } else if (key == "t-end") {
    cfg.t_end = parse_real(value);
  } else if (key == "scheme") {
    if (value == "be")
      cfg.scheme = Scheme::BackwardEuler;
    else if (value == "cn")
      cfg.scheme = Scheme::CrankNicolson;
    else
      throw ConfigError("unknown scheme '" + value + "' (be or cn)");
  } else if (key == "initial") {
    if (value == "interpolant")
      cfg.initial = InitialCondition::LagrangeInterpolant;
    else if (value == "stokes")
      cfg.initial = InitialCondition::StokesProjection;
    else
      throw ConfigError("unknown initial condition '" + value + "' (interpolant or stokes)");
  } else if (key == "method") {
    if (value == "picard")
      cfg.nonlinear.method = NonlinearMethod::Picard;
    else if (value == "newton")
      cfg.nonlinear.method = NonlinearMethod::Newton;
    else
      throw ConfigError("unknown nonlinear method '" + value + "'");
  } else if (key == "tol") {
    cfg.nonlinear.tol = parse_real(value);
  } else if (key == "max-iter") {
    cfg.nonlinear.max_iter = parse_int(value);
  } else if (key == "damping") {
    cfg.nonlinear.damping = parse_real(value);
  } else if (key == "lagged") {
    cfg.nonlinear.reuse_factorization = parse_bool(value);
  } else if (key == "verbose") {
    cfg.nonlinear.verbose = parse_bool(value);
  } else if (key == "output" || key == "output-dir") {
    cfg.output_dir = value;
  } else if (key == "threads") {
    cfg.threads = parse_int(value);
  } else {
    throw ConfigError("unknown setting '" + raw_key + "'");
  }
}

void apply_config_file(ExperimentConfig& cfg, std::istream& is) {
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    std::vector<Preset> p;
    auto add = [&](std::string name, std::string description, std::string command) {
      ExperimentConfig cfg;
      std::istringstream args(command);
      std::string token;
      std::vector<std::string> tokens;
      while (args >> token) tokens.push_back(token);
      for (std::size_t i = 0; i + 1 < tokens.size(); i += 2) apply_setting(cfg, tokens[i].substr(2), tokens[i + 1]);
      cfg.output_dir = "results/" + name;
      p.push_back({std::move(name), std::move(description), "graddiv-ns run " + command, cfg});
    };
    add("nu_sweep", "level 6, CN, dt 0.0625, T 5, mu 0.25, four viscosities",
        "--experiment nu_sweep --level 6 --dt 0.0625 --nu 1,1e-2,1e-4,1e-6 --mu 0.25 --scheme cn --t-end 5");
    add("nu_sweep_level5", "the nu sweep on level 5 (desk-scale variant)",
        "--experiment nu_sweep --level 5 --dt 0.0625 --nu 1,1e-2,1e-4,1e-6 --mu 0.25 --scheme cn --t-end 5");
    add("refinement", "levels 3..7, CN, dt 0.001 and 0.002, T 5",
        "--experiment refinement --levels 3..7 --dt 0.002,0.001 --nu 1e-4 --mu 0.25 --scheme cn --t-end 5");
    add("refinement_short", "levels 3..6, CN, dt 0.002, T 1",
        "--experiment refinement --levels 3..6 --dt 0.002 --nu 1e-4 --mu 0.25 --scheme cn --t-end 1");
    add("temporal_be", "level 6, BE, dt 0.1, 0.05, 0.025, T 1",
        "--experiment temporal_order --level 6 --dt 0.1,0.05,0.025 --nu 1e-3 --mu 0.25 --scheme be --t-end 1");
    add("temporal_cn", "level 6, CN, dt 0.2, 0.1, 0.05, T 1",
        "--experiment temporal_order --level 6 --dt 0.2,0.1,0.05 --nu 1e-3 --mu 0.25 --scheme cn --t-end 1");
    add("inf_sup", "inf-sup constants on levels 1..5",
        "--experiment inf_sup_scan --levels 1..5 --pair taylor_hood");
    add("stokes_projection", "Stokes projection errors on levels 2..5 for three viscosities",
        "--experiment stokes_projection_scan --levels 2..5 --nu 1,1e-3,1e-6");
    return p;
  }();
  return list;
}

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols{
      "level",          "h_max",          "nu",           "mu",          "dt",
      "scheme",         "final_velocity_l2", "visc_grad_seminorm", "divergence_seminorm", "velocity_aggregate",
      "pressure_l2l2",  "avg_nonlinear_iters", "max_nonlinear_iters", "wall_time_s", "divergence_l2"};
  return cols;
}

void write_results_csv(std::ostream& os, const std::vector<ErrorReport>& rows) {
  const auto& cols = results_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  const auto old = os.precision();
  for (const auto& r : rows) {
    os.precision(17);
    os << r.level << ',' << r.h_max << ',' << r.nu << ',' << r.mu << ',' << r.dt << ',' << r.scheme << ','
       << r.final_velocity_l2 << ',' << r.visc_grad_seminorm << ',' << r.divergence_seminorm << ','
       << r.velocity_aggregate << ',' << r.pressure_l2l2 << ',' << r.avg_nonlinear_iters << ','
       << r.max_nonlinear_iters << ',';
    os.precision(4);
    os << r.wall_time_s << ',';
    os.precision(17);
    os << r.divergence_l2 << '\n';
  }
  os.precision(old);
}

int worker_count(int requested, int jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("GRADDIV_NS_THREADS")) {
      try {
        n = std::stoi(env);
      } catch (const std::exception&) {
        n = 0;
      }
    }
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min(n, jobs));
}

namespace {

// Runs job(i) for i in [0, n) on a small pool; job must not throw.
template <typename Job>
void parallel_for(int n, int workers, Job&& job) {
  std::atomic<int> next{0};
  auto loop = [&] {
    for (int i = next++; i < n; i = next++) job(i);
  };
  std::vector<std::jthread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct TransientJob {
  int level;
  double nu;
  double dt;
};

void write_plot(const fs::path& path, const LogLogPlot& plot, ExperimentOutcome& out) {
  auto os = open_output(path);
  write_svg(os, plot);
  out.files.push_back(path.string());
}

void write_transient_artifacts(const ExperimentConfig& cfg, const fs::path& dir, const std::vector<ErrorReport>& rows,
                               ExperimentOutcome& out) {
  if (cfg.experiment == ExperimentKind::Refinement) {
    // Spatial orders, grouped by (nu, dt) in config order.
    auto os = open_output(dir / "rates.csv");
    os << "nu,dt,level";
    for (const auto& c : error_columns()) os << ',' << c.name << ',' << c.name << "_order";
    os << '\n';
    os.precision(17);
    LogLogPlot vel{"Velocity and pressure errors", "h_max", "error", {}, {2.0, 3.0}};
    LogLogPlot parts{"Velocity error contributions", "h_max", "error", {}, {2.0, 3.0}};
    bool first_group = true;
    for (double nu : cfg.nu_values)
      for (double dt : cfg.dt_values) {
        std::vector<ErrorReport> group;
        for (const auto& r : rows)
          if (r.nu == nu && r.dt == dt) group.push_back(r);
        if (group.empty()) continue;
        std::sort(group.begin(), group.end(),
                  [](const ErrorReport& a, const ErrorReport& b) { return a.level < b.level; });
        const ConvergenceTable t = convergence_table(group);
        for (std::size_t i = 0; i < group.size(); ++i) {
          os << nu << ',' << dt << ',' << group[i].level;
          for (std::size_t c = 0; c < t.columns.size(); ++c) {
            os << ',' << t.values[i][c] << ',';
            if (!std::isnan(t.orders[i][c])) os << t.orders[i][c];
          }
          os << '\n';
        }
        const std::string tag = " nu=" + fmt(nu) + " dt=" + fmt(dt);
        PlotSeries agg{"velocity" + tag, {}, {}}, pres{"pressure" + tag, {}, {}};
        for (const auto& r : group) {
          agg.x.push_back(r.h_max);
          agg.y.push_back(r.velocity_aggregate);
          pres.x.push_back(r.h_max);
          pres.y.push_back(r.pressure_l2l2);
        }
        vel.series.push_back(agg);
        vel.series.push_back(pres);
        if (first_group) {
          for (const char* name : {"final_velocity_l2", "visc_grad_seminorm", "divergence_seminorm"}) {
            PlotSeries s{name, {}, {}};
            for (const auto& r : group) {
              s.x.push_back(r.h_max);
              s.y.push_back(column_value(r, name));
            }
            parts.series.push_back(s);
          }
          first_group = false;
        }
      }
    out.files.push_back((dir / "rates.csv").string());
    write_plot(dir / "errors.svg", vel, out);
    write_plot(dir / "components.svg", parts, out);
  } else if (cfg.experiment == ExperimentKind::TemporalOrder) {
    auto os = open_output(dir / "rates.csv");
    os << "level,nu,dt";
    for (const auto& c : error_columns()) os << ',' << c.name << ',' << c.name << "_order";
    os << '\n';
    os.precision(17);
    const double slope = cfg.scheme == Scheme::BackwardEuler ? 1.0 : 2.0;
    LogLogPlot plot{"Temporal convergence (" + scheme_name(cfg.scheme) + ")", "dt", "error", {}, {slope}};
    for (int level : cfg.levels)
      for (double nu : cfg.nu_values) {
        std::vector<ErrorReport> group;
        for (const auto& r : rows)
          if (r.level == level && r.nu == nu) group.push_back(r);
        if (group.empty()) continue;
        std::sort(group.begin(), group.end(), [](const ErrorReport& a, const ErrorReport& b) { return a.dt > b.dt; });
        const ConvergenceTable t = temporal_convergence_table(group);
        for (std::size_t i = 0; i < group.size(); ++i) {
          os << level << ',' << nu << ',' << group[i].dt;
          for (std::size_t c = 0; c < t.columns.size(); ++c) {
            os << ',' << t.values[i][c] << ',';
            if (!std::isnan(t.orders[i][c])) os << t.orders[i][c];
          }
          os << '\n';
        }
        const std::string tag = " level=" + std::to_string(level) + " nu=" + fmt(nu);
        PlotSeries fin{"final velocity" + tag, {}, {}}, pres{"pressure" + tag, {}, {}};
        for (const auto& r : group) {
          fin.x.push_back(r.dt);
          fin.y.push_back(r.final_velocity_l2);
          pres.x.push_back(r.dt);
          pres.y.push_back(r.pressure_l2l2);
        }
        plot.series.push_back(fin);
        plot.series.push_back(pres);
      }
    out.files.push_back((dir / "rates.csv").string());
    write_plot(dir / "temporal.svg", plot, out);
  } else if (cfg.experiment == ExperimentKind::NuSweep) {
    auto os = open_output(dir / "nu_sweep.csv");
    os << "level,dt,column,min,max,ratio,flagged\n";
    os.precision(17);
    LogLogPlot plot{"Errors against viscosity", "nu", "error", {}, {}};
    for (const auto& c : error_columns()) plot.series.push_back({c.name, {}, {}});
    for (int level : cfg.levels)
      for (double dt : cfg.dt_values) {
        std::vector<ErrorReport> group;
        for (const auto& r : rows)
          if (r.level == level && r.dt == dt) group.push_back(r);
        if (group.empty()) continue;
        for (const auto& col : nu_sweep_comparison(group).columns)
          os << level << ',' << dt << ',' << col.name << ',' << col.min << ',' << col.max << ',' << col.ratio << ','
             << (col.flagged ? 1 : 0) << '\n';
        for (std::size_t k = 0; k < error_columns().size(); ++k)
          for (const auto& r : group) {
            plot.series[k].x.push_back(r.nu);
            plot.series[k].y.push_back(r.*(error_columns()[k].field));
          }
      }
    out.files.push_back((dir / "nu_sweep.csv").string());
    write_plot(dir / "nu_sweep.svg", plot, out);
  }
}

ExperimentOutcome run_transient_sweep(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  ExperimentOutcome out;
  std::vector<TransientJob> jobs;
  for (int level : cfg.levels)
    for (double nu : cfg.nu_values)
      for (double dt : cfg.dt_values) jobs.push_back({level, nu, dt});

  std::map<int, MixedSpace> spaces;
  for (int level : cfg.levels)
    if (!spaces.count(level))
      spaces.emplace(level, make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(level)), cfg.pair));

  const auto exact = paper_solution();
  std::vector<ErrorReport> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::mutex log_mutex;
  parallel_for(static_cast<int>(jobs.size()), worker_count(cfg.threads, static_cast<int>(jobs.size())), [&](int i) {
    const TransientJob& job = jobs[i];
    SchemeConfig s;
    s.scheme = cfg.scheme;
    s.dt = job.dt;
    s.t_end = cfg.t_end;
    s.nu = job.nu;
    s.mu = cfg.mu;
    s.initial = cfg.initial;
    s.nonlinear = cfg.nonlinear;
    try {
      results[i] = run_and_measure(spaces.at(job.level), exact, s);
      std::lock_guard lock(log_mutex);
      log << "level " << job.level << " nu " << job.nu << " dt " << job.dt << ": velocity_aggregate "
          << results[i].velocity_aggregate << ", pressure_l2l2 " << results[i].pressure_l2l2 << " ("
          << results[i].wall_time_s << " s)\n";
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i].empty()) {
      out.reports.push_back(results[i]);
    } else if (out.failure.empty()) {
      std::ostringstream msg;
      msg << "row level=" << jobs[i].level << " nu=" << jobs[i].nu << " dt=" << jobs[i].dt << " failed: " << errors[i];
      out.failure = msg.str();
      out.exit_code = 3;
    }
  }

  {
    auto os = open_output(dir / "results.csv");
    write_results_csv(os, out.reports);
    out.files.push_back((dir / "results.csv").string());
  }
  if (out.exit_code == 0) write_transient_artifacts(cfg, dir, out.reports, out);
  return out;
}

ExperimentOutcome run_inf_sup_scan(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  ExperimentOutcome out;
  const int n = static_cast<int>(cfg.levels.size());
  std::vector<InfSupEstimate> est(n);
  std::vector<double> h(n);
  std::vector<std::string> errors(n);
  parallel_for(n, worker_count(cfg.threads, n), [&](int i) {
    try {
      const auto mesh = std::make_shared<const Mesh>(Mesh::unit_square(cfg.levels[i]));
      h[i] = mesh->h_max();
      est[i] = estimate_inf_sup(make_mixed_space(mesh, cfg.pair));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  auto os = open_output(dir / "inf_sup.csv");
  os << "pair,level,h_max,beta_h,iterations\n";
  os.precision(17);
  PlotSeries s{pair_name(cfg.pair), {}, {}};
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      if (out.failure.empty()) out.failure = "level " + std::to_string(cfg.levels[i]) + " failed: " + errors[i];
      out.exit_code = 3;
      continue;
    }
    os << pair_name(cfg.pair) << ',' << cfg.levels[i] << ',' << h[i] << ',' << est[i].beta_h << ','
       << est[i].iterations << '\n';
    log << "level " << cfg.levels[i] << ": beta_h " << est[i].beta_h << '\n';
    s.x.push_back(h[i]);
    s.y.push_back(est[i].beta_h);
  }
  out.files.push_back((dir / "inf_sup.csv").string());
  write_plot(dir / "inf_sup.svg", LogLogPlot{"Discrete inf-sup constant", "h_max", "beta_h", {s}, {}}, out);
  return out;
}

ExperimentOutcome run_stokes_scan(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  ExperimentOutcome out;
  struct Row {
    int level;
    double nu, h, l2, h1, div, lh;
  };
  std::vector<Row> rows;
  for (int level : cfg.levels)
    for (double nu : cfg.nu_values) rows.push_back({level, nu, 0, 0, 0, 0, 0});
  const auto exact = paper_solution();
  std::map<int, MixedSpace> spaces;
  for (int level : cfg.levels)
    if (!spaces.count(level))
      spaces.emplace(level, make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(level)), cfg.pair));
  std::vector<std::string> errors(rows.size());
  const int n = static_cast<int>(rows.size());
  parallel_for(n, worker_count(cfg.threads, n), [&](int i) {
    try {
      const MixedSpace& sp = spaces.at(rows[i].level);
      const StokesProjection sh = stokes_projection(*exact, 0.0, sp, rows[i].nu);
      const VelocityErrorSample e = velocity_error(*exact, 0.0, sh.velocity);
      rows[i].h = sp.mesh().h_max();
      rows[i].l2 = std::sqrt(e.l2_sq);
      rows[i].h1 = std::sqrt(e.grad_sq);
      rows[i].div = std::sqrt(e.div_sq);
      rows[i].lh = std::sqrt(sh.pressure.coeffs().dot(assemble_mass(*sp.pressure) * sh.pressure.coeffs()));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty() && out.failure.empty()) {
      out.failure = "level " + std::to_string(rows[i].level) + " failed: " + errors[i];
      out.exit_code = 3;
    }

  auto os = open_output(dir / "stokes_projection.csv");
  os << "level,h_max,nu,velocity_l2,velocity_h1_seminorm,divergence_l2,l_h_l2\n";
  os.precision(17);
  for (int i = 0; i < n; ++i)
    if (errors[i].empty())
      os << rows[i].level << ',' << rows[i].h << ',' << rows[i].nu << ',' << rows[i].l2 << ',' << rows[i].h1 << ','
         << rows[i].div << ',' << rows[i].lh << '\n';
  out.files.push_back((dir / "stokes_projection.csv").string());
  if (out.exit_code != 0) return out;

  auto rates = open_output(dir / "rates.csv");
  rates << "nu,level,velocity_l2_order,velocity_h1_seminorm_order\n";
  rates.precision(17);
  LogLogPlot plot{"Stokes projection error", "h_max", "||u - s_h||", {}, {3.0}};
  for (double nu : cfg.nu_values) {
    PlotSeries s{"nu=" + fmt(nu), {}, {}};
    const Row* prev = nullptr;
    for (const Row& r : rows) {
      if (r.nu != nu) continue;
      s.x.push_back(r.h);
      s.y.push_back(r.l2);
      if (prev) {
        const double dl = (r.level - prev->level) * std::log(2.0);
        rates << nu << ',' << r.level << ',' << std::log(prev->l2 / r.l2) / dl << ','
              << std::log(prev->h1 / r.h1) / dl << '\n';
      }
      log << "level " << r.level << " nu " << nu << ": ||u - s_h|| " << r.l2 << ", ||l_h|| " << r.lh << '\n';
      prev = &r;
    }
    plot.series.push_back(s);
  }
  out.files.push_back((dir / "rates.csv").string());
  write_plot(dir / "stokes_projection.svg", plot, out);
  return out;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

  ExperimentOutcome out;
  switch (cfg.experiment) {
    case ExperimentKind::InfSupScan: out = run_inf_sup_scan(cfg, dir, log); break;
    case ExperimentKind::StokesProjectionScan: out = run_stokes_scan(cfg, dir, log); break;
    default: out = run_transient_sweep(cfg, dir, log); break;
  }
  return out;
}

}  // namespace graddiv
