#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "graddiv/manufactured.hpp"
#include "graddiv/solver.hpp"

namespace graddiv {

enum class Scheme { BackwardEuler, CrankNicolson };
enum class InitialCondition { LagrangeInterpolant, StokesProjection };

std::string scheme_name(Scheme s);

struct SchemeConfig {
  Scheme scheme = Scheme::CrankNicolson;
  double dt = 0.0625;
  double t_end = 5.0;
  double nu = 1.0;
  double mu = 0.25;
  InitialCondition initial = InitialCondition::LagrangeInterpolant;
  NonlinearConfig nonlinear;
  bool store_states = false;

  /// Number of steps; throws unless dt divides t_end within 1e-12.
  int n_steps() const;
  void validate() const;
};

/// Discrete state after `step` steps. For Crank-Nicolson the pressure is
/// the multiplier of the averaged momentum equation and approximates
/// p(t_{n-1/2}); `pressure_time` records where it lives.
struct FlowState {
  int step = 0;
  double time = 0.0;
  Vector velocity;
  Vector pressure;
  double pressure_time = 0.0;
  bool has_pressure = false;
  int nonlinear_iterations = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FlowState> states;  // only with store_states
  std::vector<int> nonlinear_iterations;
  FlowState final_state;
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

using StepObserver = std::function<void(const FlowState&)>;

/// Constant-step marching of the grad-div Galerkin scheme with boundary
/// data, forcing and initial value taken from an exact solution bundle.
class TransientSolver {
 public:
  TransientSolver(const MixedSpace& spaces, std::shared_ptr<const ManufacturedSolution> exact, SchemeConfig cfg);

  const SchemeConfig& config() const { return cfg_; }
  const MixedSpace& spaces() const { return solver_.spaces(); }
  FlowSolver& flow_solver() { return solver_; }

  /// I_h u(0), or the Stokes projection s_h(0).
  FlowState initial_state() const;

  /// (M/dt + nu K + mu G + N(U^n)) U^n - B^T p^n = M U^{n-1}/dt + F(t_n).
  FlowState step_backward_euler(const FlowState& prev);
  /// Trapezoidal average of viscous, grad-div, convective and load terms,
  /// divergence constraint at t_n.
  FlowState step_crank_nicolson(const FlowState& prev);
  FlowState step(const FlowState& prev);

  /// Advances `start` to t_end; the observer sees `start` and every step.
  Trajectory run(const FlowState& start, const StepObserver& observer = {});

 private:
  double time_of(int step) const { return step * cfg_.dt; }
  Vector load(double t);
  Vector boundary_values(double t) const;

  std::shared_ptr<const ManufacturedSolution> exact_;
  SchemeConfig cfg_;
  FlowSolver solver_;
  double cached_load_time_ = -1.0;
  Vector cached_load_;
};

Trajectory run_transient(const MixedSpace& spaces, std::shared_ptr<const ManufacturedSolution> exact,
                         const SchemeConfig& cfg, const StepObserver& observer = {});

}  // namespace graddiv
