#include "graddiv/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace graddiv {

namespace {

const QuadratureRule& error_rule() { return quadrature_rule(kErrorQuadratureDegree); }

template <typename Eval>
VelocityErrorSample integrate_velocity_error(const ManufacturedSolution& exact, double t, const Mesh& mesh,
                                             Eval&& eval) {
  const auto& rule = error_rule();
  VelocityErrorSample e;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh.cell_vertices(c));
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(map.det);
      const Point x = map.to_physical(rule.points[q]);
      const auto [uh, guh] = eval(c, q, map, x);
      const Point du = exact.velocity(x, t) - uh;
      const Eigen::Matrix2d dg = exact.velocity_gradient(x, t) - guh;
      e.l2_sq += w * du.squaredNorm();
      e.grad_sq += w * dg.squaredNorm();
      e.div_sq += w * dg.trace() * dg.trace();
    }
  }
  return e;
}

template <typename Eval>
double integrate_pressure_error(const ManufacturedSolution& exact, double t, const Mesh& mesh, Eval&& eval) {
  const auto& rule = error_rule();
  double sum = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh.cell_vertices(c));
    for (int q = 0; q < rule.size(); ++q) {
      const Point x = map.to_physical(rule.points[q]);
      const double d = exact.pressure(x, t) - eval(c, q, x);
      sum += rule.weights[q] * std::abs(map.det) * d * d;
    }
  }
  return sum;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

VelocityErrorSample velocity_error(const ManufacturedSolution& exact, double t, const FEFunction& u_h) {
  const FESpace& space = u_h.space();
  if (space.components() != 2) throw std::invalid_argument("velocity_error: vector field expected");
  const Tabulation tab = tabulate(space.family(), error_rule());
  return integrate_velocity_error(exact, t, space.mesh(), [&](int c, int q, const CellMap& map, const Point&) {
    const auto u0 = u_h.local(c, 0), u1 = u_h.local(c, 1);
    const auto g = map.physical_gradients(tab.at[q].gradients);
    Eigen::Matrix2d grad;
    grad.row(0) = (g.transpose() * u0).transpose();
    grad.row(1) = (g.transpose() * u1).transpose();
    return std::pair<Point, Eigen::Matrix2d>{Point(tab.at[q].values.dot(u0), tab.at[q].values.dot(u1)), grad};
  });
}

VelocityErrorSample velocity_error(const ManufacturedSolution& exact, double t, const Mesh& mesh,
                                   const VelocityEvaluator& u_h) {
  const auto& rule = error_rule();
  return integrate_velocity_error(exact, t, mesh,
                                  [&](int c, int q, const CellMap&, const Point& x) { return u_h(c, rule.points[q], x); });
}

double pressure_error_sq(const ManufacturedSolution& exact, double t, const FEFunction& p_h) {
  const FESpace& space = p_h.space();
  if (space.components() != 1) throw std::invalid_argument("pressure_error_sq: scalar field expected");
  const Tabulation tab = tabulate(space.family(), error_rule());
  return integrate_pressure_error(exact, t, space.mesh(),
                                  [&](int c, int q, const Point&) { return tab.at[q].values.dot(p_h.local(c)); });
}

double pressure_error_sq(const ManufacturedSolution& exact, double t, const Mesh& mesh, const PressureEvaluator& p_h) {
  const auto& rule = error_rule();
  return integrate_pressure_error(exact, t, mesh,
                                  [&](int c, int q, const Point& x) { return p_h(c, rule.points[q], x); });
}

// ---------------------------------------------------------------------------

ErrorAccumulator::ErrorAccumulator(std::shared_ptr<const ManufacturedSolution> exact, double nu, double mu)
    : exact_(std::move(exact)), nu_(nu), mu_(mu) {
  if (!exact_) throw std::invalid_argument("ErrorAccumulator: exact solution required");
}

void ErrorAccumulator::add_velocity(double t, const VelocityErrorSample& e) {
  if (samples_ > 0) {
    const double h = t - last_t_;
    if (!(h > 0.0)) throw std::invalid_argument("ErrorAccumulator: velocity samples must have increasing times");
    grad_int_ += 0.5 * h * (last_.grad_sq + e.grad_sq);
    div_int_ += 0.5 * h * (last_.div_sq + e.div_sq);
  }
  last_ = e;
  last_t_ = t;
  ++samples_;
}

void ErrorAccumulator::add_velocity(double t, const FEFunction& u_h) { add_velocity(t, velocity_error(*exact_, t, u_h)); }

void ErrorAccumulator::add_pressure(double weight, double e_sq) { pressure_sum_ += weight * e_sq; }

void ErrorAccumulator::add_pressure(double t, double weight, const FEFunction& p_h) {
  add_pressure(weight, pressure_error_sq(*exact_, t, p_h));
}

void ErrorAccumulator::observe(const FlowState& s, const MixedSpace& spaces, double dt) {
  add_velocity(s.time, FEFunction(spaces.velocity, s.velocity));
  if (s.has_pressure) add_pressure(s.pressure_time, dt, FEFunction(spaces.pressure, s.pressure));
}

ErrorReport ErrorAccumulator::report(ErrorReport meta) const {
  meta.final_velocity_l2 = std::sqrt(last_.l2_sq);
  meta.visc_grad_seminorm = std::sqrt(nu_ * grad_int_);
  meta.divergence_seminorm = std::sqrt(mu_ * div_int_);
  meta.divergence_l2 = std::sqrt(div_int_);
  meta.velocity_aggregate = std::sqrt(last_.l2_sq + nu_ * grad_int_ + mu_ * div_int_);
  meta.pressure_l2l2 = std::sqrt(pressure_sum_);
  return meta;
}

namespace {

ErrorReport metadata(const MixedSpace& spaces, const SchemeConfig& cfg) {
  ErrorReport r;
  r.pair = pair_name(spaces.pair);
  r.level = spaces.mesh().level();
  r.h_max = spaces.mesh().h_max();
  r.nu = cfg.nu;
  r.mu = cfg.mu;
  r.dt = cfg.dt;
  r.scheme = scheme_name(cfg.scheme);
  return r;
}

void fill_iterations(ErrorReport& r, const std::vector<int>& its) {
  if (its.empty()) return;
  double sum = 0.0;
  for (int k : its) sum += k;
  r.avg_nonlinear_iters = sum / static_cast<double>(its.size());
  r.max_nonlinear_iters = *std::max_element(its.begin(), its.end());
}

}  // namespace

ErrorReport error_norms(const Trajectory& traj, const ManufacturedSolution& exact, const MixedSpace& spaces,
                        const SchemeConfig& cfg) {
  if (traj.states.empty()) throw std::invalid_argument("error_norms: trajectory without stored states");
  // Non-owning handle; the accumulator does not outlive this call.
  ErrorAccumulator acc(std::shared_ptr<const ManufacturedSolution>(&exact, [](const ManufacturedSolution*) {}), cfg.nu,
                       cfg.mu);
  for (const FlowState& s : traj.states) acc.observe(s, spaces, cfg.dt);
  ErrorReport r = acc.report(metadata(spaces, cfg));
  fill_iterations(r, traj.nonlinear_iterations);
  return r;
}

ErrorReport run_and_measure(const MixedSpace& spaces, std::shared_ptr<const ManufacturedSolution> exact,
                            const SchemeConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ErrorAccumulator acc(exact, cfg.nu, cfg.mu);
  SchemeConfig run_cfg = cfg;
  run_cfg.store_states = false;
  const Trajectory traj =
      run_transient(spaces, exact, run_cfg, [&](const FlowState& s) { acc.observe(s, spaces, cfg.dt); });
  ErrorReport r = acc.report(metadata(spaces, cfg));
  fill_iterations(r, traj.nonlinear_iterations);
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------------------

const std::vector<ErrorColumn>& error_columns() {
  static const std::vector<ErrorColumn> cols{
      {"final_velocity_l2", &ErrorReport::final_velocity_l2},
      {"visc_grad_seminorm", &ErrorReport::visc_grad_seminorm},
      {"divergence_seminorm", &ErrorReport::divergence_seminorm},
      {"divergence_l2", &ErrorReport::divergence_l2},
      {"velocity_aggregate", &ErrorReport::velocity_aggregate},
      {"pressure_l2l2", &ErrorReport::pressure_l2l2},
  };
  return cols;
}

double column_value(const ErrorReport& r, const std::string& column) {
  for (const auto& c : error_columns())
    if (c.name == column) return r.*(c.field);
  throw std::invalid_argument("unknown error column '" + column + "'");
}

double ConvergenceTable::order(const std::string& column, int row) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::invalid_argument("unknown error column '" + column + "'");
  if (row < 0 || row >= static_cast<int>(rows.size())) throw std::out_of_range("convergence table row");
  return orders[row][it - columns.begin()];
}

void ConvergenceTable::write_csv(std::ostream& os) const {
  os << parameter;
  for (const auto& c : columns) os << ',' << c << ',' << c << "_order";
  os << '\n';
  const auto old = os.precision(17);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (parameter == "dt")
      os << rows[r].dt;
    else
      os << rows[r].level;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << ',' << values[r][c] << ',';
      if (!std::isnan(orders[r][c])) os << orders[r][c];
    }
    os << '\n';
  }
  os.precision(old);
}

namespace {

template <typename Ratio>
ConvergenceTable build_table(std::string parameter, const std::vector<ErrorReport>& reports, Ratio&& log_ratio) {
  ConvergenceTable t;
  t.parameter = std::move(parameter);
  for (const auto& c : error_columns()) t.columns.push_back(c.name);
  t.rows = reports;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t r = 0; r < reports.size(); ++r) {
    std::vector<double> vals, ords;
    for (const auto& c : error_columns()) {
      const double e = reports[r].*(c.field);
      vals.push_back(e);
      if (r == 0) {
        ords.push_back(nan);
      } else {
        const double prev = reports[r - 1].*(c.field);
        ords.push_back(prev > 0.0 && e > 0.0 ? std::log(prev / e) / log_ratio(reports[r - 1], reports[r]) : nan);
      }
    }
    t.values.push_back(std::move(vals));
    t.orders.push_back(std::move(ords));
  }
  return t;
}

}  // namespace

ConvergenceTable convergence_table(const std::vector<ErrorReport>& reports) {
  for (std::size_t r = 1; r < reports.size(); ++r) {
    const auto& a = reports[r - 1];
    const auto& b = reports[r];
    if (!same(a.nu, b.nu) || !same(a.mu, b.mu) || !same(a.dt, b.dt) || a.scheme != b.scheme || a.pair != b.pair)
      throw std::invalid_argument("convergence_table: reports differ in more than the mesh level");
    if (b.level <= a.level) throw std::invalid_argument("convergence_table: levels must increase");
  }
  return build_table("level", reports, [](const ErrorReport& a, const ErrorReport& b) {
    return (b.level - a.level) * std::log(2.0);
  });
}

ConvergenceTable temporal_convergence_table(const std::vector<ErrorReport>& reports) {
  for (std::size_t r = 1; r < reports.size(); ++r) {
    const auto& a = reports[r - 1];
    const auto& b = reports[r];
    if (!same(a.nu, b.nu) || !same(a.mu, b.mu) || a.level != b.level || a.scheme != b.scheme || a.pair != b.pair)
      throw std::invalid_argument("temporal_convergence_table: reports differ in more than the time step");
    if (!(b.dt < a.dt)) throw std::invalid_argument("temporal_convergence_table: time steps must decrease");
  }
  return build_table("dt", reports,
                     [](const ErrorReport& a, const ErrorReport& b) { return std::log(a.dt / b.dt); });
}

bool NuSweepSummary::robust() const {
  return std::none_of(columns.begin(), columns.end(), [](const NuSweepColumn& c) { return c.flagged; });
}

NuSweepSummary nu_sweep_comparison(const std::vector<ErrorReport>& reports, double threshold) {
  NuSweepSummary s;
  s.threshold = threshold;
  if (reports.empty()) return s;
  for (const auto& c : error_columns()) {
    NuSweepColumn col;
    col.name = c.name;
    col.min = col.max = reports.front().*(c.field);
    for (const auto& r : reports) {
      col.min = std::min(col.min, r.*(c.field));
      col.max = std::max(col.max, r.*(c.field));
    }
    col.ratio = col.min > 0.0 ? col.max / col.min : (col.max > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    col.flagged = col.ratio > threshold;
    s.columns.push_back(std::move(col));
  }
  return s;
}

}  // namespace graddiv
