#include "graddiv/timestepping.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace graddiv {

std::string scheme_name(Scheme s) { return s == Scheme::BackwardEuler ? "BE" : "CN"; }

int SchemeConfig::n_steps() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("final time must be positive");
  const double ratio = t_end / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(n * dt - t_end) > 1e-12) {
    std::ostringstream msg;
    msg << "time step " << dt << " does not divide final time " << t_end;
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(n);
}

void SchemeConfig::validate() const {
  n_steps();
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("grad-div parameter must be non-negative");
  nonlinear.validate();
}

TransientSolver::TransientSolver(const MixedSpace& spaces, std::shared_ptr<const ManufacturedSolution> exact,
                                 SchemeConfig cfg)
    : exact_(std::move(exact)), cfg_(std::move(cfg)), solver_(spaces) {
  if (!exact_) throw std::invalid_argument("TransientSolver: exact solution bundle required");
  cfg_.validate();
}

Vector TransientSolver::load(double t) {
  if (t != cached_load_time_) {
    cached_load_ = assemble_load(
        *spaces().velocity, VectorField([&](const Point& x) { return exact_->forcing(x, t, cfg_.nu); }));
    cached_load_time_ = t;
  }
  return cached_load_;
}

Vector TransientSolver::boundary_values(double t) const {
  return interpolate(spaces().velocity, VectorField([&](const Point& x) { return exact_->velocity(x, t); })).coeffs();
}

FlowState TransientSolver::initial_state() const {
  FlowState s;
  if (cfg_.initial == InitialCondition::StokesProjection)
    s.velocity = stokes_projection(*exact_, 0.0, spaces(), cfg_.nu).velocity.coeffs();
  else
    s.velocity = boundary_values(0.0);
  s.pressure = Vector::Zero(spaces().pressure->n_dofs());
  return s;
}

FlowState TransientSolver::step_backward_euler(const FlowState& prev) {
  const int n = prev.step + 1;
  const double t = time_of(n);
  StepEquation eq;
  eq.mass_coeff = 1.0 / cfg_.dt;
  eq.theta = 1.0;
  eq.nu = cfg_.nu;
  eq.mu = cfg_.mu;
  eq.rhs = solver_.operators().mass * prev.velocity / cfg_.dt + load(t);
  eq.boundary_values = boundary_values(t);

  NonlinearResult r;
  try {
    r = solver_.solve_nonlinear(eq, prev.velocity, cfg_.nonlinear);
  } catch (const NonlinearConvergenceError& e) {
    throw StepFailure(n, "step " + std::to_string(n) + ": " + e.what());
  }
  FlowState s;
  s.step = n;
  s.time = t;
  s.velocity = std::move(r.velocity);
  s.pressure = std::move(r.pressure);
  s.pressure_time = t;
  s.has_pressure = true;
  s.nonlinear_iterations = r.iterations;
  return s;
}

FlowState TransientSolver::step_crank_nicolson(const FlowState& prev) {
  const int n = prev.step + 1;
  const double t = time_of(n);
  const double t_prev = time_of(prev.step);
  const FlowOperators& ops = solver_.operators();

  const FEFunction w_prev(spaces().velocity, prev.velocity);
  const SparseOperator explicit_part = cfg_.nu * ops.stiffness + cfg_.mu * ops.graddiv +
                                       assemble_convection(w_prev, *spaces().velocity, ConvectionForm::Picard);
  const Vector f_prev = load(t_prev);
  const Vector f_now = load(t);

  StepEquation eq;
  eq.mass_coeff = 1.0 / cfg_.dt;
  eq.theta = 0.5;
  eq.nu = cfg_.nu;
  eq.mu = cfg_.mu;
  eq.rhs = ops.mass * prev.velocity / cfg_.dt - 0.5 * (explicit_part * prev.velocity) + 0.5 * (f_prev + f_now);
  eq.boundary_values = boundary_values(t);

  NonlinearResult r;
  try {
    r = solver_.solve_nonlinear(eq, prev.velocity, cfg_.nonlinear);
  } catch (const NonlinearConvergenceError& e) {
    throw StepFailure(n, "step " + std::to_string(n) + ": " + e.what());
  }
  FlowState s;
  s.step = n;
  s.time = t;
  s.velocity = std::move(r.velocity);
  // The multiplier of the averaged equation: p at the interval midpoint.
  s.pressure = std::move(r.pressure);
  s.pressure_time = 0.5 * (t_prev + t);
  s.has_pressure = true;
  s.nonlinear_iterations = r.iterations;
  return s;
}

FlowState TransientSolver::step(const FlowState& prev) {
  if (prev.velocity.size() != spaces().velocity->n_dofs())
    throw std::invalid_argument("TransientSolver::step: state does not match the velocity space");
  return cfg_.scheme == Scheme::BackwardEuler ? step_backward_euler(prev) : step_crank_nicolson(prev);
}

Trajectory TransientSolver::run(const FlowState& start, const StepObserver& observer) {
  const int n_steps = cfg_.n_steps();
  if (start.step < 0 || start.step > n_steps) throw std::invalid_argument("start state outside the time grid");
  Trajectory traj;
  traj.times.push_back(start.time);
  if (cfg_.store_states) traj.states.push_back(start);
  if (observer) observer(start);

  FlowState state = start;
  for (int n = start.step + 1; n <= n_steps; ++n) {
    state = step(state);
    traj.times.push_back(state.time);
    traj.nonlinear_iterations.push_back(state.nonlinear_iterations);
    if (cfg_.store_states) traj.states.push_back(state);
    if (observer) observer(state);
  }
  traj.final_state = std::move(state);
  return traj;
}

Trajectory run_transient(const MixedSpace& spaces, std::shared_ptr<const ManufacturedSolution> exact,
                         const SchemeConfig& cfg, const StepObserver& observer) {
  TransientSolver solver(spaces, std::move(exact), cfg);
  return solver.run(solver.initial_state(), observer);
}

}  // namespace graddiv
