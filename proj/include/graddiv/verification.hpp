#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "graddiv/manufactured.hpp"
#include "graddiv/spaces.hpp"
#include "graddiv/timestepping.hpp"

namespace graddiv {

/// Squared error integrals of one velocity sample.
struct VelocityErrorSample {
  double l2_sq = 0.0;    // ||u - u_h||^2
  double grad_sq = 0.0;  // ||grad(u - u_h)||^2
  double div_sq = 0.0;   // ||div(u - u_h)||^2
};

/// Approximate velocity (value, gradient (i, j) = d_j u_i) at a point of a cell.
using VelocityEvaluator = std::function<std::pair<Point, Eigen::Matrix2d>(int cell, const Barycentric& l, const Point& x)>;
using PressureEvaluator = std::function<double(int cell, const Barycentric& l, const Point& x)>;

VelocityErrorSample velocity_error(const ManufacturedSolution& exact, double t, const FEFunction& u_h);
VelocityErrorSample velocity_error(const ManufacturedSolution& exact, double t, const Mesh& mesh,
                                   const VelocityEvaluator& u_h);
/// ||p - p_h||^2; p_h is compared as is (both are expected to have zero mean).
double pressure_error_sq(const ManufacturedSolution& exact, double t, const FEFunction& p_h);
double pressure_error_sq(const ManufacturedSolution& exact, double t, const Mesh& mesh, const PressureEvaluator& p_h);

struct ErrorReport {
  std::string pair;
  int level = 0;
  double h_max = 0.0;
  double nu = 0.0;
  double mu = 0.0;
  double dt = 0.0;
  std::string scheme;

  double final_velocity_l2 = 0.0;    // ||(u - u_h)(T)||
  double visc_grad_seminorm = 0.0;   // (nu int ||grad(u - u_h)||^2 dt)^{1/2}
  double divergence_seminorm = 0.0;  // (mu int ||div u_h||^2 dt)^{1/2}
  double divergence_l2 = 0.0;        // (int ||div u_h||^2 dt)^{1/2}
  double velocity_aggregate = 0.0;   // combination of the three above
  double pressure_l2l2 = 0.0;        // (sum_n dt ||p(t*) - p_h^n||^2)^{1/2}

  double avg_nonlinear_iters = 0.0;
  int max_nonlinear_iters = 0;
  double wall_time_s = 0.0;
};

/// Time integration of error samples: composite trapezoid over the velocity
/// samples, weighted sum over pressure samples.
class ErrorAccumulator {
 public:
  ErrorAccumulator(std::shared_ptr<const ManufacturedSolution> exact, double nu, double mu);

  void add_velocity(double t, const VelocityErrorSample& e);
  void add_velocity(double t, const FEFunction& u_h);
  void add_pressure(double weight, double e_sq);
  void add_pressure(double t, double weight, const FEFunction& p_h);

  /// Velocity sample of any state, pressure sample (weight dt) of every
  /// state that carries a pressure.
  void observe(const FlowState& s, const MixedSpace& spaces, double dt);

  int velocity_samples() const { return samples_; }
  /// Fills the error columns of `meta` and returns it.
  ErrorReport report(ErrorReport meta = {}) const;

 private:
  std::shared_ptr<const ManufacturedSolution> exact_;
  double nu_;
  double mu_;
  int samples_ = 0;
  double last_t_ = 0.0;
  VelocityErrorSample last_;
  double grad_int_ = 0.0;
  double div_int_ = 0.0;
  double pressure_sum_ = 0.0;
};

/// Error report of a stored trajectory.
ErrorReport error_norms(const Trajectory& traj, const ManufacturedSolution& exact, const MixedSpace& spaces,
                        const SchemeConfig& cfg);

/// Transient run with on-the-fly error accumulation; fills all report fields.
ErrorReport run_and_measure(const MixedSpace& spaces, std::shared_ptr<const ManufacturedSolution> exact,
                            const SchemeConfig& cfg);

/// Named accessor of one error column of a report.
struct ErrorColumn {
  std::string name;
  double ErrorReport::*field;
};
const std::vector<ErrorColumn>& error_columns();
double column_value(const ErrorReport& r, const std::string& column);

/// Error columns side by side with orders of convergence between
/// consecutive rows; orders[0] is NaN.
struct ConvergenceTable {
  std::string parameter;  // "level" or "dt"
  std::vector<std::string> columns;
  std::vector<ErrorReport> rows;
  std::vector<std::vector<double>> values;  // [row][column]
  std::vector<std::vector<double>> orders;  // [row][column]

  double order(const std::string& column, int row) const;
  void write_csv(std::ostream& os) const;
};

/// Orders log2(E_l / E_{l+1}) over levels l, l+1, ...; the reports must share
/// nu, mu, dt and scheme and have increasing levels.
ConvergenceTable convergence_table(const std::vector<ErrorReport>& reports);
/// Orders log(E_k / E_{k+1}) / log(dt_k / dt_{k+1}); shared level, nu, mu, scheme.
ConvergenceTable temporal_convergence_table(const std::vector<ErrorReport>& reports);

struct NuSweepColumn {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double ratio = 0.0;  // max / min
  bool flagged = false;
};

struct NuSweepSummary {
  double threshold = 1.25;
  std::vector<NuSweepColumn> columns;
  bool robust() const;
};

/// Spread of each error column over reports that differ only in nu.
NuSweepSummary nu_sweep_comparison(const std::vector<ErrorReport>& reports, double threshold = 1.25);

}  // namespace graddiv
