#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "graddiv/solver.hpp"
#include "graddiv/verification.hpp"
#include "oracles.hpp"

using namespace graddiv;

namespace {

Vector restrict_to(const Vector& full, const std::vector<int>& dofs) {
  Vector out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) out(static_cast<Eigen::Index>(i)) = full(dofs[i]);
  return out;
}

// Steady Stokes (nu = 1) with the paper's fields at t = 0.
LinearSystem stokes_system(const MixedSpace& sp, const ManufacturedSolution& ex) {
  LinearSystem sys;
  sys.A_vv = assemble_stiffness(*sp.velocity);
  sys.B_pv = assemble_divergence(*sp.velocity, *sp.pressure);
  sys.rhs_v = assemble_load(*sp.velocity, VectorField([&](const Point& x) {
    return Point(-ex.velocity_laplacian(x, 0.0) + ex.pressure_gradient(x, 0.0));
  }));
  sys.rhs_p = Vector::Zero(sp.pressure->n_dofs());
  sys.dirichlet_dofs = sp.velocity->boundary_dofs();
  sys.dirichlet_values = restrict_to(
      interpolate(sp.velocity, VectorField([&](const Point& x) { return ex.velocity(x, 0.0); })).coeffs(),
      sys.dirichlet_dofs);
  sys.pressure_weights = basis_integrals(*sp.pressure);
  return sys;
}

// Full residual: momentum rows off the boundary, all divergence rows but the
// gauge, and the mismatch of the constrained values.
double full_residual(const LinearSystem& sys, const SaddleSolution& s) {
  Vector rv = sys.A_vv * s.velocity - sys.B_pv.transpose() * s.pressure - sys.rhs_v;
  double constrained = 0.0;
  for (std::size_t i = 0; i < sys.dirichlet_dofs.size(); ++i) {
    const int d = sys.dirichlet_dofs[i];
    rv(d) = 0.0;
    constrained = std::max(constrained, std::abs(s.velocity(d) - sys.dirichlet_values(static_cast<Eigen::Index>(i))));
  }
  Vector rp = sys.B_pv * s.velocity - sys.rhs_p;
  rp(sys.pressure_gauge) = 0.0;
  const double scale = sys.rhs_v.norm() + (sys.A_vv * s.velocity).norm() + 1e-300;
  return std::max(std::sqrt(rv.squaredNorm() + rp.squaredNorm()) / scale, constrained);
}

// Dense generalized eigenproblem on the zero-trace velocity space.
double dense_inf_sup(const MixedSpace& sp) {
  const std::vector<int>& bd = sp.velocity->boundary_dofs();
  std::vector<int> free;
  for (int i = 0, k = 0; i < sp.velocity->n_dofs(); ++i) {
    if (k < static_cast<int>(bd.size()) && bd[k] == i) {
      ++k;
      continue;
    }
    free.push_back(i);
  }
  const Eigen::MatrixXd K(assemble_stiffness(*sp.velocity));
  const Eigen::MatrixXd B(assemble_divergence(*sp.velocity, *sp.pressure));
  const Eigen::MatrixXd Mp(assemble_mass(*sp.pressure));
  Eigen::MatrixXd Kf(free.size(), free.size()), Bf(B.rows(), free.size());
  for (std::size_t j = 0; j < free.size(); ++j) {
    Bf.col(j) = B.col(free[j]);
    for (std::size_t i = 0; i < free.size(); ++i) Kf(i, j) = K(free[i], free[j]);
  }
  const Eigen::MatrixXd S = Bf * Kf.llt().solve(Bf.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Mp);
  // The constant pressure gives the zero eigenvalue.
  CHECK(std::abs(es.eigenvalues()(0)) <= 1e-10);
  return std::sqrt(es.eigenvalues()(1));
}

double l2_norm(const FEFunction& p) { return std::sqrt(p.coeffs().dot(assemble_mass(p.space()) * p.coeffs())); }

}  // namespace

TEST_CASE("solve_saddle") {
  const MixedSpace sp = oracle::mixed(2);
  SUBCASE("zero data gives zero") {
    LinearSystem sys;
    sys.A_vv = assemble_stiffness(*sp.velocity);
    sys.B_pv = assemble_divergence(*sp.velocity, *sp.pressure);
    sys.rhs_v = Vector::Zero(sp.velocity->n_dofs());
    sys.rhs_p = Vector::Zero(sp.pressure->n_dofs());
    sys.dirichlet_dofs = sp.velocity->boundary_dofs();
    sys.dirichlet_values = Vector::Zero(static_cast<Eigen::Index>(sys.dirichlet_dofs.size()));
    const SaddleSolution s = solve_saddle(sys);
    CHECK(s.velocity.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.pressure.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("random data: residual, constraints and zero-mean pressure") {
    LinearSystem sys = stokes_system(sp, *paper_solution());
    sys.A_vv = sys.A_vv + assemble_mass(*sp.velocity);
    sys.rhs_v = Vector::NullaryExpr(sp.velocity->n_dofs(), [] { return oracle::uniform(-1, 1); });
    const SaddleSolution s = solve_saddle(sys);
    CHECK(s.relative_residual <= 1e-10);
    CHECK(full_residual(sys, s) <= 1e-10);
    CHECK(std::abs(sys.pressure_weights.dot(s.pressure)) <= 1e-12);
  }
  SUBCASE("singular factorization is reported") {
    SaddlePointSolver solver(sp.velocity->n_dofs(), sp.pressure->n_dofs(), sp.velocity->boundary_dofs());
    SparseOperator zero(sp.velocity->n_dofs(), sp.velocity->n_dofs());
    CHECK_THROWS_AS(solver.factorize(zero, assemble_divergence(*sp.velocity, *sp.pressure)), SingularSystemError);
  }
  SUBCASE("symbolic analysis is reused for a fixed pattern") {
    const FlowOperators ops = assemble_flow_operators(sp);
    SaddlePointSolver solver(sp.velocity->n_dofs(), sp.pressure->n_dofs(), sp.velocity->boundary_dofs());
    solver.factorize(ops.mass + ops.stiffness, ops.divergence);
    solver.factorize(2.0 * ops.mass + 0.1 * ops.stiffness + ops.graddiv, ops.divergence);
    CHECK(solver.symbolic_analyses() == 1);
  }
}

TEST_CASE("steady Stokes converges with orders 3 and 2") {
  const auto ex = paper_solution();
  std::vector<double> ev, ep;
  for (int level = 2; level <= 5; ++level) {
    const MixedSpace sp = oracle::mixed(level);
    const SaddleSolution s = solve_saddle(stokes_system(sp, *ex));
    ev.push_back(std::sqrt(velocity_error(*ex, 0.0, FEFunction(sp.velocity, s.velocity)).l2_sq));
    ep.push_back(std::sqrt(pressure_error_sq(*ex, 0.0, FEFunction(sp.pressure, s.pressure))));
  }
  for (std::size_t k = 2; k < ev.size(); ++k) {
    CHECK(oracle::log2_ratio(ev[k - 1], ev[k]) == doctest::Approx(3.0).epsilon(0.1));
    CHECK(oracle::log2_ratio(ep[k - 1], ep[k]) >= 1.9);
  }
}

TEST_CASE("nonlinear step solver") {
  const MixedSpace sp = oracle::mixed(3);
  FlowSolver solver(sp);
  const auto ex = paper_solution();
  const double dt = 0.0625;
  const Vector u0 = interpolate(sp.velocity, VectorField([&](const Point& x) { return ex->velocity(x, 0.0); })).coeffs();
  auto step_eq = [&](double nu) {
    StepEquation eq;
    eq.mass_coeff = 1.0 / dt;
    eq.nu = nu;
    eq.mu = 0.25;
    eq.rhs = solver.operators().mass * u0 / dt +
             assemble_load(*sp.velocity, VectorField([&](const Point& x) { return ex->forcing(x, dt, nu); }));
    eq.boundary_values = interpolate(sp.velocity, VectorField([&](const Point& x) { return ex->velocity(x, dt); })).coeffs();
    return eq;
  };

  SUBCASE("zero problem: zero state after one iteration") {
    StepEquation eq;
    eq.mass_coeff = 1.0 / dt;
    eq.rhs = Vector::Zero(sp.velocity->n_dofs());
    eq.boundary_values = Vector::Zero(sp.velocity->n_dofs());
    const NonlinearResult r = solver.solve_nonlinear(eq, eq.rhs, NonlinearConfig{});
    CHECK(r.iterations == 1);
    CHECK(r.velocity.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.pressure.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("fixed point: residual, restart from the solution") {
    const NonlinearConfig cfg;
    const StepEquation eq = step_eq(1e-2);
    const NonlinearResult r = solver.solve_nonlinear(eq, u0, cfg);
    CHECK(solver.step_residual(eq, r.velocity, r.pressure) <= 10 * cfg.tol);
    const NonlinearResult again = solver.solve_nonlinear(eq, r.velocity, cfg);
    CHECK(again.iterations <= 2);
    CHECK((again.velocity - r.velocity).norm() <= 1e-9 * r.velocity.norm());
  }
  SUBCASE("lagged factorization and Newton reach the same fixed point") {
    const StepEquation eq = step_eq(1e-3);
    const NonlinearResult picard = solver.solve_nonlinear(eq, u0, NonlinearConfig{});
    FlowSolver other(sp);
    const NonlinearResult lagged = other.solve_nonlinear(eq, u0, NonlinearConfig{.reuse_factorization = true});
    const NonlinearResult newton = other.solve_nonlinear(eq, u0, NonlinearConfig{.method = NonlinearMethod::Newton});
    CHECK((lagged.velocity - picard.velocity).norm() <= 1e-8 * picard.velocity.norm());
    CHECK((newton.velocity - picard.velocity).norm() <= 1e-8 * picard.velocity.norm());
    CHECK((lagged.pressure - picard.pressure).norm() <= 1e-7 * picard.pressure.norm());
    CHECK(newton.iterations <= picard.iterations);
  }
  SUBCASE("non-convergence is surfaced") {
    NonlinearConfig cfg;
    cfg.max_iter = 1;
    cfg.tol = 1e-14;
    try {
      solver.solve_nonlinear(step_eq(1e-4), u0, cfg);
      FAIL("expected NonlinearConvergenceError");
    } catch (const NonlinearConvergenceError& e) {
      CHECK(e.iterations() == 1);
      CHECK(e.last_increment() > 0.0);
    }
  }
}

TEST_CASE("Picard converges on level 4 with dt 0.0625 and nu 1e-4") {
  const MixedSpace sp = oracle::mixed(4);
  FlowSolver solver(sp);
  const auto ex = paper_solution();
  const double dt = 0.0625, nu = 1e-4;
  const Vector u0 = interpolate(sp.velocity, VectorField([&](const Point& x) { return ex->velocity(x, 0.0); })).coeffs();
  StepEquation eq;
  eq.mass_coeff = 1.0 / dt;
  eq.nu = nu;
  eq.mu = 0.25;
  eq.rhs = solver.operators().mass * u0 / dt +
           assemble_load(*sp.velocity, VectorField([&](const Point& x) { return ex->forcing(x, dt, nu); }));
  eq.boundary_values = interpolate(sp.velocity, VectorField([&](const Point& x) { return ex->velocity(x, dt); })).coeffs();
  const NonlinearResult r = solver.solve_nonlinear(eq, u0, NonlinearConfig{});
  MESSAGE("Picard iterations: " << r.iterations);
  WARN_LE(r.iterations, 15);
  CHECK(r.last_increment <= 1e-10);
}

TEST_CASE("NonlinearConfig validation") {
  CHECK_NOTHROW(NonlinearConfig{}.validate());
  CHECK_THROWS_AS(NonlinearConfig{.tol = 0.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(NonlinearConfig{.max_iter = 0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(NonlinearConfig{.damping = 1.5}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(NonlinearConfig{.damping = 0.0}.validate(), std::invalid_argument);
}

TEST_CASE("Stokes projection") {
  const auto ex = paper_solution();
  SUBCASE("order 3 in L2") {
    std::vector<double> e;
    for (int level = 2; level <= 5; ++level) {
      const MixedSpace sp = oracle::mixed(level);
      e.push_back(std::sqrt(velocity_error(*ex, 0.0, stokes_projection(*ex, 0.0, sp, 1.0).velocity).l2_sq));
    }
    for (std::size_t k = 1; k < e.size(); ++k) CHECK(oracle::log2_ratio(e[k - 1], e[k]) == doctest::Approx(3.0).epsilon(0.1));
  }
  SUBCASE("viscosity-uniform velocity error, pressure proportional to nu") {
    const MixedSpace sp = oracle::mixed(4);
    std::vector<double> e;
    for (double nu : {1.0, 1e-3, 1e-6}) e.push_back(std::sqrt(velocity_error(*ex, 0.0, stokes_projection(*ex, 0.0, sp, nu).velocity).l2_sq));
    CHECK(*std::max_element(e.begin(), e.end()) / *std::min_element(e.begin(), e.end()) <= 1.10);
    const double l2 = l2_norm(stokes_projection(*ex, 0.0, sp, 1e-2).pressure);
    const double l4 = l2_norm(stokes_projection(*ex, 0.0, sp, 1e-4).pressure);
    CHECK(l2 / l4 >= 50.0);
    CHECK(l2 / l4 <= 200.0);
    CHECK(l4 < l2);
  }
  SUBCASE("representable fields are reproduced") {
    const QuadraticSolution q;
    const MixedSpace sp = oracle::mixed(2);
    for (double nu : {1.0, 0.01}) {
      const StokesProjection s = stokes_projection(q, 0.0, sp, nu);
      const FEFunction iu = interpolate(sp.velocity, VectorField([&](const Point& x) { return q.velocity(x, 0.0); }));
      CHECK((s.velocity.coeffs() - iu.coeffs()).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(s.pressure.coeffs().cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("discrete Leray projection") {
  const MixedSpace sp = oracle::mixed(2);
  const SparseOperator B = assemble_divergence(*sp.velocity, *sp.pressure);
  const SparseOperator M = assemble_mass(*sp.velocity);
  const FEFunction v(sp.velocity, oracle::random_zero_trace(*sp.velocity));
  const FEFunction pv = discrete_leray_project(v, sp);
  const double scale = v.coeffs().norm();
  CHECK((B * pv.coeffs()).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  CHECK((discrete_leray_project(pv, sp).coeffs() - pv.coeffs()).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  CHECK(std::sqrt(pv.coeffs().dot(M * pv.coeffs())) <= std::sqrt(v.coeffs().dot(M * v.coeffs())) + 1e-12);
  // L2-orthogonality of the defect to the discretely divergence-free subspace.
  const FEFunction z = discrete_leray_project(FEFunction(sp.velocity, oracle::random_zero_trace(*sp.velocity)), sp);
  CHECK(std::abs((v.coeffs() - pv.coeffs()).dot(M * z.coeffs())) <= 1e-12 * scale * z.coeffs().norm());
  for (int d : sp.velocity->boundary_dofs()) CHECK(pv.coeffs()(d) == 0.0);
}

TEST_CASE("inf-sup estimate") {
  SUBCASE("agrees with a dense generalized eigensolve") {
    for (PairTag pair : {PairTag::TaylorHood21, PairTag::Mini11})
      for (int level : {1, 2, 3}) {
        const MixedSpace sp = oracle::mixed(level, pair);
        const InfSupEstimate est = estimate_inf_sup(sp);
        CHECK(est.beta_h == doctest::Approx(dense_inf_sup(sp)).epsilon(1e-6));
        CHECK(est.level == level);
        CHECK(est.pair == pair);
      }
  }
  SUBCASE("positive, mesh independent, MINI below Taylor-Hood") {
    const double th2 = estimate_inf_sup(oracle::mixed(2)).beta_h;
    const double th3 = estimate_inf_sup(oracle::mixed(3)).beta_h;
    const double mini3 = estimate_inf_sup(oracle::mixed(3, PairTag::Mini11)).beta_h;
    CHECK(th2 > 0.0);
    CHECK(mini3 > 0.0);
    CHECK(std::abs(th2 - th3) / th3 <= 0.05);
    CHECK(mini3 <= th3);
    MESSAGE("beta_h level 3: Taylor-Hood " << th3 << ", MINI " << mini3);
  }
  SUBCASE("stagnation is an error") {
    CHECK_THROWS_AS(estimate_inf_sup(oracle::mixed(2), InfSupOptions{.tol = 1e-10, .max_iter = 3}), std::runtime_error);
  }
}
