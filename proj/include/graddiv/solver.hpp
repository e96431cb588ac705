#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>

#include "graddiv/assembly.hpp"
#include "graddiv/manufactured.hpp"
#include "graddiv/spaces.hpp"

namespace graddiv {

/// Saddle-point system
///   A u - B^T p = rhs_v,   -B u = -rhs_p,
/// with u fixed on `dirichlet_dofs` and the pressure dof `pressure_gauge`
/// pinned to zero during the solve.
struct LinearSystem {
  SparseOperator A_vv;
  SparseOperator B_pv;
  Vector rhs_v;
  Vector rhs_p;
  std::vector<int> dirichlet_dofs;  // sorted
  Vector dirichlet_values;          // same order as dirichlet_dofs
  int pressure_gauge = 0;
  /// Integrals of the pressure basis; when set, the returned pressure is
  /// shifted to zero mean.
  Vector pressure_weights;
};

struct SaddleSolution {
  Vector velocity;
  Vector pressure;
  double relative_residual = 0.0;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse direct LU for one constrained saddle-point structure.
///
/// The constrained velocity dofs and the pressure gauge are fixed at
/// construction; `factorize` can be called repeatedly with new values, and the
/// symbolic analysis (fill-reducing ordering) is redone only when the sparsity
/// pattern of the reduced matrix changes.
class SaddlePointSolver {
 public:
  SaddlePointSolver(int n_velocity, int n_pressure, std::vector<int> constrained_dofs, int pressure_gauge = 0);

  void factorize(const SparseOperator& A, const SparseOperator& B);

  /// `boundary` is a full-length velocity vector; only its constrained
  /// entries are read. The pinned pressure row is dropped, so `rhs_p` may be
  /// incompatible in that single row.
  SaddleSolution solve(const Vector& rhs_v, const Vector& rhs_p, const Vector& boundary) const;

  int n_velocity() const { return n_velocity_; }
  int n_pressure() const { return n_pressure_; }
  int reduced_size() const { return reduced_size_; }
  int symbolic_analyses() const { return analyses_; }

 private:
  Vector reduced_rhs(const Vector& rhs_v, const Vector& rhs_p, const Vector& g) const;
  Vector residual(const Vector& u, const Vector& p, const Vector& rhs_v, const Vector& rhs_p) const;

  int n_velocity_;
  int n_pressure_;
  int gauge_;
  std::vector<int> constrained_;
  std::vector<int> velocity_map_;  // full -> reduced, -1 if constrained
  std::vector<int> pressure_map_;  // full -> reduced, -1 for the gauge
  int reduced_size_ = 0;

  SparseOperator A_;
  SparseOperator B_;
  Eigen::SparseMatrix<double> kkt_;
  std::vector<int> pattern_outer_;
  std::vector<int> pattern_inner_;
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu_;
  bool factorized_ = false;
  int analyses_ = 0;
};

/// One-shot solve; pressure returned with zero mean when weights are given.
SaddleSolution solve_saddle(const LinearSystem& sys);

/// Operators of the discrete grad-div formulation on a mixed space,
/// assembled once and combined with nu, mu, dt at solve time.
struct FlowOperators {
  MixedSpace spaces;
  SparseOperator mass;
  SparseOperator stiffness;
  SparseOperator graddiv;
  SparseOperator divergence;
  Vector pressure_weights;
};

FlowOperators assemble_flow_operators(const MixedSpace& spaces);

enum class NonlinearMethod { Picard, Newton };

struct NonlinearConfig {
  NonlinearMethod method = NonlinearMethod::Picard;
  double tol = 1e-10;  // on ||U^{k+1} - U^k|| / ||U^{k+1}||
  int max_iter = 50;
  double damping = 1.0;
  /// Keep the factorization of an earlier iterate (also across calls) and
  /// iterate on the residual; refactor when the contraction degrades. Same
  /// fixed point, fewer factorizations for small time steps.
  bool reuse_factorization = false;
  bool verbose = false;

  void validate() const;
};

/// Implicit step equation for the unknown velocity U and pressure p:
///   (mass_coeff M + theta (nu K + mu G + N(U))) U - B^T p = rhs,  B U = 0,
/// with U equal to `boundary_values` on the boundary dofs.
struct StepEquation {
  double mass_coeff = 0.0;
  double theta = 1.0;
  double nu = 1.0;
  double mu = 0.0;
  Vector rhs;
  Vector boundary_values;
};

struct NonlinearResult {
  Vector velocity;
  Vector pressure;  // zero mean
  int iterations = 0;
  double last_increment = 0.0;
};

class NonlinearConvergenceError : public std::runtime_error {
 public:
  NonlinearConvergenceError(int iterations, double last_increment);
  int iterations() const { return iterations_; }
  double last_increment() const { return last_increment_; }

 private:
  int iterations_;
  double last_increment_;
};

/// Owns the assembled operators and the factorization cache of one mixed space.
class FlowSolver {
 public:
  explicit FlowSolver(const MixedSpace& spaces);
  explicit FlowSolver(FlowOperators ops);

  const FlowOperators& operators() const { return ops_; }
  const MixedSpace& spaces() const { return ops_.spaces; }

  /// Fixed-point iteration for the step equation starting from `guess`.
  /// Throws NonlinearConvergenceError after cfg.max_iter iterations.
  NonlinearResult solve_nonlinear(const StepEquation& eq, const Vector& guess, const NonlinearConfig& cfg);

  /// Residual of the step equation (momentum rows on free dofs, all
  /// divergence rows but the gauge) at a given state, relative to the rhs.
  double step_residual(const StepEquation& eq, const Vector& u, const Vector& p) const;

 private:
  FlowOperators ops_;
  SaddlePointSolver saddle_;
  bool lagged_valid_ = false;
  std::array<double, 4> lagged_key_{};
};

struct StokesProjection {
  FEFunction velocity;  // s_h
  FEFunction pressure;  // l_h, zero mean
};

/// Mixed Stokes approximation of (u(t), 0) with viscosity nu and load
/// g = f - du/dt - (u . grad) u - grad p, boundary values I_h u(t).
StokesProjection stokes_projection(const ManufacturedSolution& exact, double t, const MixedSpace& spaces, double nu);

/// L2-orthogonal projection onto the discretely divergence-free subspace of
/// the zero-trace velocity space.
FEFunction discrete_leray_project(const FEFunction& v, const MixedSpace& spaces);

struct InfSupEstimate {
  double beta_h = 0.0;
  int level = 0;
  PairTag pair = PairTag::TaylorHood21;
  int iterations = 0;
};

struct InfSupOptions {
  double tol = 1e-10;
  int max_iter = 20000;
};

/// sqrt of the smallest nonzero eigenvalue of B K^{-1} B^T q = lambda M_p q
/// (zero-trace velocity, H1-seminorm Gram K), by inverse iteration with the
/// constant pressure deflated.
InfSupEstimate estimate_inf_sup(const MixedSpace& spaces, const InfSupOptions& opts = {});

}  // namespace graddiv
