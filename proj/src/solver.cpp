#include "graddiv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

namespace graddiv {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, int>>;

Vector boundary_vector(int n, const std::vector<int>& dofs, const Vector& values) {
  Vector g = Vector::Zero(n);
  for (std::size_t i = 0; i < dofs.size(); ++i) g(dofs[i]) = values(static_cast<Eigen::Index>(i));
  return g;
}

void shift_to_zero_mean(Vector& p, const Vector& weights) {
  if (weights.size() == 0) return;
  p.array() -= weights.dot(p) / weights.sum();
}

}  // namespace

// ---------------------------------------------------------------------------
// SaddlePointSolver

SaddlePointSolver::SaddlePointSolver(int n_velocity, int n_pressure, std::vector<int> constrained_dofs,
                                     int pressure_gauge)
    : n_velocity_(n_velocity), n_pressure_(n_pressure), gauge_(pressure_gauge), constrained_(std::move(constrained_dofs)) {
  std::sort(constrained_.begin(), constrained_.end());
  velocity_map_.assign(n_velocity_, 0);
  for (int d : constrained_) velocity_map_.at(d) = -1;
  int next = 0;
  for (int& m : velocity_map_) m = m < 0 ? -1 : next++;
  pressure_map_.assign(n_pressure_, -1);
  for (int k = 0; k < n_pressure_; ++k)
    if (k != gauge_) pressure_map_[k] = next++;
  reduced_size_ = next;
}

void SaddlePointSolver::factorize(const SparseOperator& A, const SparseOperator& B) {
  if (A.rows() != n_velocity_ || A.cols() != n_velocity_ || B.rows() != n_pressure_ || B.cols() != n_velocity_)
    throw std::invalid_argument("SaddlePointSolver: block dimensions do not match");
  A_ = A;
  B_ = B;

  Triplets t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * B.nonZeros()));
  for (int r = 0; r < n_velocity_; ++r) {
    const int rr = velocity_map_[r];
    if (rr < 0) continue;
    for (SparseOperator::InnerIterator it(A, r); it; ++it)
      if (const int cc = velocity_map_[it.col()]; cc >= 0) t.emplace_back(rr, cc, it.value());
  }
  for (int k = 0; k < n_pressure_; ++k) {
    const int pk = pressure_map_[k];
    if (pk < 0) continue;
    for (SparseOperator::InnerIterator it(B, k); it; ++it) {
      const int cc = velocity_map_[it.col()];
      if (cc < 0) continue;
      t.emplace_back(pk, cc, -it.value());
      t.emplace_back(cc, pk, -it.value());
    }
  }
  kkt_.resize(reduced_size_, reduced_size_);
  kkt_.setFromTriplets(t.begin(), t.end());
  kkt_.makeCompressed();

  const bool same_pattern =
      factorized_ && static_cast<std::size_t>(kkt_.nonZeros()) == pattern_inner_.size() &&
      std::equal(pattern_outer_.begin(), pattern_outer_.end(), kkt_.outerIndexPtr()) &&
      std::equal(pattern_inner_.begin(), pattern_inner_.end(), kkt_.innerIndexPtr());
  if (!same_pattern) {
    lu_.analyzePattern(kkt_);
    ++analyses_;
    pattern_outer_.assign(kkt_.outerIndexPtr(), kkt_.outerIndexPtr() + kkt_.outerSize() + 1);
    pattern_inner_.assign(kkt_.innerIndexPtr(), kkt_.innerIndexPtr() + kkt_.nonZeros());
  }
  lu_.factorize(kkt_);
  if (lu_.info() != Eigen::Success) {
    factorized_ = false;
    std::ostringstream msg;
    msg << "saddle-point factorization failed (" << static_cast<int>(lu_.info()) << "): pinned pressure dof " << gauge_
        << ", velocity block " << n_velocity_ << " (" << constrained_.size() << " constrained), pressure block "
        << n_pressure_;
    throw SingularSystemError(msg.str());
  }
  factorized_ = true;
}

Vector SaddlePointSolver::reduced_rhs(const Vector& rhs_v, const Vector& rhs_p, const Vector& g) const {
  const Vector Ag = A_ * g;
  const Vector Bg = B_ * g;
  Vector b(reduced_size_);
  for (int r = 0; r < n_velocity_; ++r)
    if (velocity_map_[r] >= 0) b(velocity_map_[r]) = rhs_v(r) - Ag(r);
  for (int k = 0; k < n_pressure_; ++k)
    if (pressure_map_[k] >= 0) b(pressure_map_[k]) = -(rhs_p(k) - Bg(k));
  return b;
}

Vector SaddlePointSolver::residual(const Vector& u, const Vector& p, const Vector& rhs_v, const Vector& rhs_p) const {
  Vector rv = A_ * u - B_.transpose() * p - rhs_v;
  for (int d : constrained_) rv(d) = 0.0;
  Vector rp = B_ * u - rhs_p;
  rp(gauge_) = 0.0;
  Vector r(rv.size() + rp.size());
  r << rv, rp;
  return r;
}

SaddleSolution SaddlePointSolver::solve(const Vector& rhs_v, const Vector& rhs_p, const Vector& boundary) const {
  if (!factorized_) throw std::logic_error("SaddlePointSolver::solve before factorize");
  Vector g = Vector::Zero(n_velocity_);
  for (int d : constrained_) g(d) = boundary(d);

  const Vector b = reduced_rhs(rhs_v, rhs_p, g);
  Vector x = lu_.solve(b);

  auto expand = [&](const Vector& red, Vector& u, Vector& p) {
    u = g;
    p = Vector::Zero(n_pressure_);
    for (int r = 0; r < n_velocity_; ++r)
      if (velocity_map_[r] >= 0) u(r) = red(velocity_map_[r]);
    for (int k = 0; k < n_pressure_; ++k)
      if (pressure_map_[k] >= 0) p(k) = red(pressure_map_[k]);
  };

  SaddleSolution sol;
  expand(x, sol.velocity, sol.pressure);
  const double scale = rhs_v.norm() + rhs_p.norm() + (A_ * sol.velocity).norm() +
                       (B_.transpose() * sol.pressure).norm();
  Vector r = residual(sol.velocity, sol.pressure, rhs_v, rhs_p);
  if (scale > 0.0 && r.norm() > 1e-13 * scale) {
    // One step of iterative refinement on the reduced system.
    const Vector defect = kkt_ * x - b;
    x -= lu_.solve(defect);
    expand(x, sol.velocity, sol.pressure);
    r = residual(sol.velocity, sol.pressure, rhs_v, rhs_p);
  }
  sol.relative_residual = scale > 0.0 ? r.norm() / scale : 0.0;
  return sol;
}

SaddleSolution solve_saddle(const LinearSystem& sys) {
  const int nv = static_cast<int>(sys.A_vv.rows());
  const int np = static_cast<int>(sys.B_pv.rows());
  if (static_cast<Eigen::Index>(sys.dirichlet_dofs.size()) != sys.dirichlet_values.size())
    throw std::invalid_argument("solve_saddle: dirichlet dofs and values differ in length");
  SaddlePointSolver solver(nv, np, sys.dirichlet_dofs, sys.pressure_gauge);
  solver.factorize(sys.A_vv, sys.B_pv);
  SaddleSolution sol = solver.solve(sys.rhs_v, sys.rhs_p, boundary_vector(nv, sys.dirichlet_dofs, sys.dirichlet_values));
  shift_to_zero_mean(sol.pressure, sys.pressure_weights);
  return sol;
}

// ---------------------------------------------------------------------------
// Nonlinear step solver

FlowOperators assemble_flow_operators(const MixedSpace& spaces) {
  const FESpace& v = *spaces.velocity;
  const FESpace& q = *spaces.pressure;
  return {spaces, assemble_mass(v), assemble_stiffness(v), assemble_graddiv(v), assemble_divergence(v, q),
          basis_integrals(q)};
}

void NonlinearConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("NonlinearConfig: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("NonlinearConfig: max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("NonlinearConfig: damping must be in (0, 1]");
}

NonlinearConvergenceError::NonlinearConvergenceError(int iterations, double last_increment)
    : std::runtime_error("nonlinear iteration did not converge after " + std::to_string(iterations) +
                         " iterations (last relative increment " + std::to_string(last_increment) + ")"),
      iterations_(iterations),
      last_increment_(last_increment) {}

FlowSolver::FlowSolver(const MixedSpace& spaces) : FlowSolver(assemble_flow_operators(spaces)) {}

FlowSolver::FlowSolver(FlowOperators ops)
    : ops_(std::move(ops)),
      saddle_(ops_.spaces.velocity->n_dofs(), ops_.spaces.pressure->n_dofs(), ops_.spaces.velocity->boundary_dofs()) {}

NonlinearResult FlowSolver::solve_nonlinear(const StepEquation& eq, const Vector& guess, const NonlinearConfig& cfg) {
  cfg.validate();
  const auto& vspace = ops_.spaces.velocity;
  const SparseOperator linear =
      eq.mass_coeff * ops_.mass + (eq.theta * eq.nu) * ops_.stiffness + (eq.theta * eq.mu) * ops_.graddiv;
  const Vector zero_p = Vector::Zero(ops_.spaces.pressure->n_dofs());
  const ConvectionForm form = cfg.method == NonlinearMethod::Picard ? ConvectionForm::Picard : ConvectionForm::Newton;

  FEFunction w(vspace, guess);
  for (int d : vspace->boundary_dofs()) w.coeffs()(d) = eq.boundary_values(d);

  NonlinearResult result;
  auto finish = [&](int k, double increment, double norm, const SaddleSolution& sol) {
    result.last_increment = norm > 0.0 ? increment / norm : increment;
    result.iterations = k;
    if (cfg.verbose)
      std::cerr << "  nonlinear it " << k << " rel. increment " << result.last_increment << " lin. residual "
                << sol.relative_residual << '\n';
    return increment <= cfg.tol * norm;
  };

  if (!cfg.reuse_factorization) {
    lagged_valid_ = false;
    for (int k = 1; k <= cfg.max_iter; ++k) {
      const SparseOperator conv = assemble_convection(w, *vspace, form);
      saddle_.factorize(linear + eq.theta * conv, ops_.divergence);
      // Newton: J w = 2 b(w, w, .), so the right-hand side gains theta/2 J w.
      const SaddleSolution sol =
          form == ConvectionForm::Picard
              ? saddle_.solve(eq.rhs, zero_p, eq.boundary_values)
              : saddle_.solve(eq.rhs + (0.5 * eq.theta) * (conv * w.coeffs()), zero_p, eq.boundary_values);

      const Vector step = cfg.damping * (sol.velocity - w.coeffs());
      w.coeffs() += step;
      result.pressure = sol.pressure;
      if (finish(k, step.norm(), w.coeffs().norm(), sol)) {
        result.velocity = w.coeffs();
        shift_to_zero_mean(result.pressure, ops_.pressure_weights);
        return result;
      }
    }
    throw NonlinearConvergenceError(result.iterations, result.last_increment);
  }

  // Defect correction with a factorization kept from an earlier iterate,
  // possibly from an earlier call. Refactor when the contraction degrades.
  const std::array<double, 4> key{eq.mass_coeff, eq.theta, eq.nu, eq.mu};
  if (lagged_key_ != key) lagged_valid_ = false;
  lagged_key_ = key;

  Vector p = Vector::Zero(ops_.spaces.pressure->n_dofs());
  const Vector zero_v = Vector::Zero(vspace->n_dofs());
  double previous_increment = 0.0;
  int since_refactor = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const SparseOperator conv = assemble_convection(w, *vspace, ConvectionForm::Picard);
    if (!lagged_valid_) {
      const SparseOperator lhs =
          form == ConvectionForm::Picard ? SparseOperator(conv) : assemble_convection(w, *vspace, form);
      saddle_.factorize(linear + eq.theta * lhs, ops_.divergence);
      lagged_valid_ = true;
      since_refactor = 0;
      previous_increment = 0.0;
    }
    const Vector rv = eq.rhs - (linear * w.coeffs() + eq.theta * (conv * w.coeffs())) +
                      ops_.divergence.transpose() * p;
    const Vector rp = -(ops_.divergence * w.coeffs());
    SaddleSolution sol = saddle_.solve(rv, rp, zero_v);

    const Vector step = cfg.damping * sol.velocity;
    w.coeffs() += step;
    p += sol.pressure;
    ++since_refactor;
    result.pressure = p;
    const double increment = step.norm();
    if (finish(k, increment, w.coeffs().norm(), sol)) {
      result.velocity = w.coeffs();
      shift_to_zero_mean(result.pressure, ops_.pressure_weights);
      return result;
    }
    if ((since_refactor > 1 && increment > 0.25 * previous_increment) || since_refactor >= 8) lagged_valid_ = false;
    previous_increment = increment;
  }
  throw NonlinearConvergenceError(result.iterations, result.last_increment);
}

double FlowSolver::step_residual(const StepEquation& eq, const Vector& u, const Vector& p) const {
  const auto& vspace = ops_.spaces.velocity;
  const FEFunction w(vspace, u);
  const SparseOperator A = eq.mass_coeff * ops_.mass + (eq.theta * eq.nu) * ops_.stiffness +
                           (eq.theta * eq.mu) * ops_.graddiv +
                           eq.theta * assemble_convection(w, *vspace, ConvectionForm::Picard);
  Vector rv = A * u - ops_.divergence.transpose() * p - eq.rhs;
  for (int d : vspace->boundary_dofs()) rv(d) = 0.0;
  Vector rp = ops_.divergence * u;
  rp(0) = 0.0;
  const double scale = eq.rhs.norm() + (A * u).norm() + (ops_.divergence.transpose() * p).norm();
  const double r = std::sqrt(rv.squaredNorm() + rp.squaredNorm());
  return scale > 0.0 ? r / scale : r;
}

// ---------------------------------------------------------------------------
// Projections

StokesProjection stokes_projection(const ManufacturedSolution& exact, double t, const MixedSpace& spaces, double nu) {
  const FESpace& v = *spaces.velocity;
  LinearSystem sys;
  sys.A_vv = nu * assemble_stiffness(v);
  sys.B_pv = assemble_divergence(v, *spaces.pressure);
  sys.rhs_v = assemble_load(v, VectorField([&](const Point& x) {
    return Point(exact.forcing(x, t, nu) - exact.velocity_dt(x, t) -
                 exact.velocity_gradient(x, t) * exact.velocity(x, t) - exact.pressure_gradient(x, t));
  }));
  sys.rhs_p = Vector::Zero(spaces.pressure->n_dofs());
  const FEFunction boundary = interpolate(spaces.velocity, VectorField([&](const Point& x) { return exact.velocity(x, t); }));
  sys.dirichlet_dofs = v.boundary_dofs();
  sys.dirichlet_values.resize(static_cast<Eigen::Index>(sys.dirichlet_dofs.size()));
  for (std::size_t i = 0; i < sys.dirichlet_dofs.size(); ++i)
    sys.dirichlet_values(static_cast<Eigen::Index>(i)) = boundary.coeffs()(sys.dirichlet_dofs[i]);
  sys.pressure_weights = basis_integrals(*spaces.pressure);
  SaddleSolution sol = solve_saddle(sys);
  return {FEFunction(spaces.velocity, std::move(sol.velocity)), FEFunction(spaces.pressure, std::move(sol.pressure))};
}

FEFunction discrete_leray_project(const FEFunction& v, const MixedSpace& spaces) {
  if (v.space_ptr() != spaces.velocity) throw std::invalid_argument("discrete_leray_project: foreign velocity space");
  const FESpace& vs = *spaces.velocity;
  LinearSystem sys;
  sys.A_vv = assemble_mass(vs);
  sys.B_pv = assemble_divergence(vs, *spaces.pressure);
  sys.rhs_v = sys.A_vv * v.coeffs();
  sys.rhs_p = Vector::Zero(spaces.pressure->n_dofs());
  sys.dirichlet_dofs = vs.boundary_dofs();
  sys.dirichlet_values = Vector::Zero(static_cast<Eigen::Index>(sys.dirichlet_dofs.size()));
  return FEFunction(spaces.velocity, solve_saddle(sys).velocity);
}

// ---------------------------------------------------------------------------
// Inf-sup constant

InfSupEstimate estimate_inf_sup(const MixedSpace& spaces, const InfSupOptions& opts) {
  const FESpace& vs = *spaces.velocity;
  const FESpace& ps = *spaces.pressure;
  const SparseOperator K = assemble_stiffness(vs);
  const SparseOperator B = assemble_divergence(vs, ps);
  const SparseOperator Mp = assemble_mass(ps);
  const Vector ones = Vector::Ones(ps.n_dofs());
  const Vector m1 = Mp * ones;
  const double mass_of_one = ones.dot(m1);

  SaddlePointSolver solver(vs.n_dofs(), ps.n_dofs(), vs.boundary_dofs());
  solver.factorize(K, B);
  const Vector zero_v = Vector::Zero(vs.n_dofs());

  auto deflate = [&](Vector& x) { x -= (m1.dot(x) / mass_of_one) * ones; };
  auto m_norm = [&](const Vector& x) { return std::sqrt(x.dot(Mp * x)); };

  // Deterministic start with components along many eigenvectors.
  Vector x(ps.n_dofs());
  for (int i = 0; i < ps.n_dofs(); ++i) {
    const Point p = ps.dof_coord(i);
    x(i) = std::sin(3.1 * p.x() + 1.3) * std::cos(2.3 * p.y() - 0.4) + 0.3 * std::cos(17.0 * p.x() * p.y());
  }
  deflate(x);
  x /= m_norm(x);

  // With rhs_p = c, the system gives K u = B^T y, B u = c, i.e. S y = c.
  InfSupEstimate est{0.0, spaces.mesh().level(), spaces.pair, 0};
  double lambda_old = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector mx = Mp * x;
    const SaddleSolution sol = solver.solve(zero_v, mx, zero_v);
    Vector y = sol.pressure;
    deflate(y);
    const Vector my = Mp * y;
    // Rayleigh quotient of y: y^T S y = y^T M x.
    const double lambda = y.dot(mx) / y.dot(my);
    x = y / std::sqrt(y.dot(my));
    est.iterations = it;
    est.beta_h = std::sqrt(lambda);
    if (it > 1 && std::abs(lambda - lambda_old) < opts.tol * lambda) return est;
    lambda_old = lambda;
  }
  throw std::runtime_error("estimate_inf_sup: inverse iteration stagnated after " + std::to_string(opts.max_iter) +
                           " iterations");
}

}  // namespace graddiv
