#include <doctest.h>

#include <cmath>
#include <sstream>

#include "graddiv/verification.hpp"
#include "oracles.hpp"

using namespace graddiv;

namespace {

ErrorReport row(int level, double value, double dt = 0.0625, double nu = 1.0) {
  ErrorReport r;
  r.pair = "taylor_hood";
  r.level = level;
  r.h_max = std::sqrt(2.0) / (1 << level);
  r.nu = nu;
  r.mu = 0.25;
  r.dt = dt;
  r.scheme = "CN";
  for (const auto& c : error_columns()) r.*c.field = value;
  return r;
}

VelocityEvaluator exact_velocity(const ManufacturedSolution& ex, double t) {
  return [&ex, t](int, const Barycentric&, const Point& x) { return std::make_pair(ex.velocity(x, t), ex.velocity_gradient(x, t)); };
}

}  // namespace

TEST_CASE("error functionals vanish on the exact solution") {
  const auto ex = paper_solution();
  const Mesh mesh = Mesh::unit_square(2);
  for (double t : {0.0, 0.7, 3.1}) {
    const VelocityErrorSample e = velocity_error(*ex, t, mesh, exact_velocity(*ex, t));
    CHECK(e.l2_sq <= 1e-20);
    CHECK(e.grad_sq <= 1e-20);
    CHECK(e.div_sq <= 1e-20);
    CHECK(pressure_error_sq(*ex, t, mesh, [&](int, const Barycentric&, const Point& x) { return ex->pressure(x, t); }) <= 1e-20);
  }

  // A whole trajectory sampled exactly.
  ErrorAccumulator acc(ex, 1e-2, 0.25);
  for (int n = 0; n <= 8; ++n) {
    const double t = 0.125 * n;
    acc.add_velocity(t, velocity_error(*ex, t, mesh, exact_velocity(*ex, t)));
    if (n > 0)
      acc.add_pressure(0.125, pressure_error_sq(*ex, t, mesh, [&](int, const Barycentric&, const Point& x) { return ex->pressure(x, t); }));
  }
  const ErrorReport r = acc.report();
  for (const auto& c : error_columns()) CHECK(r.*c.field <= 1e-10);
}

TEST_CASE("error of a constant offset matches a tensor-Gauss oracle") {
  const auto ex = paper_solution();
  const Mesh mesh = Mesh::unit_square(3);
  const double t = 0.4;
  const Point shift(0.3, -0.2);
  const VelocityErrorSample e = velocity_error(*ex, t, mesh, [&](int, const Barycentric&, const Point& x) {
    return std::make_pair(Point(ex->velocity(x, t) + shift), ex->velocity_gradient(x, t));
  });
  CHECK(e.l2_sq == doctest::Approx(shift.squaredNorm()).epsilon(1e-12));
  CHECK(e.grad_sq <= 1e-24);

  // Pressure error of p_h = 0 is ||p||^2.
  const double p_sq = oracle::integrate_square([&](double x, double y) { return std::pow(ex->pressure(Point(x, y), t), 2); });
  CHECK(pressure_error_sq(*ex, t, mesh, [](int, const Barycentric&, const Point&) { return 0.0; }) ==
        doctest::Approx(p_sq).epsilon(1e-10));
}

TEST_CASE("interpolated trajectory gives interpolation-sized errors") {
  const auto ex = paper_solution();
  const MixedSpace sp = oracle::mixed(3);
  double worst_l2 = 0.0;
  ErrorAccumulator acc(ex, 1.0, 0.25);
  for (int n = 0; n <= 4; ++n) {
    const double t = 0.25 * n;
    const FEFunction iu = interpolate(sp.velocity, VectorField([&](const Point& x) { return ex->velocity(x, t); }));
    const VelocityErrorSample e = velocity_error(*ex, t, iu);
    worst_l2 = std::max(worst_l2, std::sqrt(e.l2_sq));
    acc.add_velocity(t, e);
  }
  CHECK(worst_l2 > 0.0);
  CHECK(worst_l2 <= 1e-3);
  const ErrorReport r = acc.report();
  CHECK(r.visc_grad_seminorm <= 0.05);
  CHECK(r.divergence_l2 > 0.0);
  CHECK(r.divergence_seminorm == doctest::Approx(0.5 * r.divergence_l2).epsilon(1e-12));
}

TEST_CASE("perturbation bound") {
  const auto ex = paper_solution();
  const MixedSpace sp = oracle::mixed(2);
  const double t = 0.3;
  const FEFunction iu = interpolate(sp.velocity, VectorField([&](const Point& x) { return ex->velocity(x, t); }));
  const Vector phi = oracle::random_zero_trace(*sp.velocity);
  const double phi_norm = std::sqrt(phi.dot(assemble_mass(*sp.velocity) * phi));
  const double e0 = std::sqrt(velocity_error(*ex, t, iu).l2_sq);
  for (double delta : {1e-1, 1e-3, 1e-6}) {
    const double e1 = std::sqrt(velocity_error(*ex, t, FEFunction(sp.velocity, iu.coeffs() + delta * phi)).l2_sq);
    CHECK(std::abs(e1 - e0) <= delta * phi_norm * (1 + 1e-10));
  }
}

TEST_CASE("accumulator time integration") {
  ErrorAccumulator acc(paper_solution(), 0.5, 2.0);
  // grad_sq(t) = 1 + t, div_sq(t) = t: the trapezoid rule is exact.
  for (double t : {0.0, 0.5, 1.5, 2.0}) acc.add_velocity(t, VelocityErrorSample{.l2_sq = t * t, .grad_sq = 1 + t, .div_sq = t});
  acc.add_pressure(0.5, 4.0);
  acc.add_pressure(1.5, 1.0);
  const ErrorReport r = acc.report();
  CHECK(r.final_velocity_l2 == doctest::Approx(2.0));
  CHECK(r.visc_grad_seminorm == doctest::Approx(std::sqrt(0.5 * 4.0)));
  CHECK(r.divergence_l2 == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.divergence_seminorm == doctest::Approx(std::sqrt(2.0 * 2.0)));
  CHECK(r.velocity_aggregate == doctest::Approx(std::sqrt(4.0 + 2.0 + 4.0)));
  CHECK(r.pressure_l2l2 == doctest::Approx(std::sqrt(3.5)));
  CHECK(acc.velocity_samples() == 4);
  CHECK_THROWS_AS(acc.add_velocity(2.0, VelocityErrorSample{}), std::invalid_argument);
}

TEST_CASE("stored and streamed error evaluation agree") {
  const MixedSpace sp = oracle::mixed(2);
  const auto ex = paper_solution();
  SchemeConfig cfg{.scheme = Scheme::CrankNicolson, .dt = 0.125, .t_end = 0.5, .nu = 1e-2, .store_states = true};
  const ErrorReport a = error_norms(run_transient(sp, ex, cfg), *ex, sp, cfg);
  const ErrorReport b = run_and_measure(sp, ex, cfg);
  for (const auto& c : error_columns()) CHECK(a.*c.field == doctest::Approx(b.*c.field).epsilon(1e-13));
  CHECK(b.scheme == "CN");
  CHECK(b.level == 2);
  CHECK(b.max_nonlinear_iters >= 1);
  CHECK(b.wall_time_s >= 0.0);
  cfg.store_states = false;
  CHECK_THROWS(error_norms(run_transient(sp, ex, cfg), *ex, sp, cfg));
}

TEST_CASE("convergence tables") {
  SUBCASE("exact halving sequence") {
    const ConvergenceTable t = convergence_table({row(3, 4.0), row(4, 1.0), row(5, 0.25)});
    CHECK(std::isnan(t.order("final_velocity_l2", 0)));
    for (const auto& c : error_columns()) {
      CHECK(t.order(c.name, 1) == doctest::Approx(2.0));
      CHECK(t.order(c.name, 2) == doctest::Approx(2.0));
    }
  }
  SUBCASE("hand-computed order") {
    const ConvergenceTable t = convergence_table({row(3, 1.0), row(4, 0.135)});
    CHECK(t.order("pressure_l2l2", 1) == doctest::Approx(std::log2(1.0 / 0.135)));
    CHECK(t.order("pressure_l2l2", 1) == doctest::Approx(2.889).epsilon(1e-3));
  }
  SUBCASE("level gaps are accounted for") {
    const ConvergenceTable t = convergence_table({row(2, 1.0), row(4, 1.0 / 64)});
    CHECK(t.order("velocity_aggregate", 1) == doctest::Approx(3.0));
  }
  SUBCASE("orders are invariant under scaling") {
    const ConvergenceTable a = convergence_table({row(3, 0.7), row(4, 0.1), row(5, 0.02)});
    const ConvergenceTable b = convergence_table({row(3, 7e3), row(4, 1e3), row(5, 2e2)});
    for (int k = 1; k < 3; ++k) CHECK(a.order("divergence_l2", k) == doctest::Approx(b.order("divergence_l2", k)));
  }
  SUBCASE("mismatched rows are rejected") {
    CHECK_THROWS_AS(convergence_table({row(3, 1.0), row(4, 0.5, 0.03125)}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_table({row(3, 1.0), row(4, 0.5, 0.0625, 0.1)}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_table({row(4, 1.0), row(3, 0.5)}), std::invalid_argument);
  }
  SUBCASE("temporal table") {
    const ConvergenceTable t = temporal_convergence_table({row(6, 1.0, 0.2), row(6, 0.25, 0.1), row(6, 0.0625, 0.05)});
    CHECK(t.parameter == "dt");
    CHECK(t.order("final_velocity_l2", 2) == doctest::Approx(2.0));
    CHECK_THROWS_AS(temporal_convergence_table({row(6, 1.0, 0.1), row(6, 0.5, 0.2)}), std::invalid_argument);
    CHECK_THROWS_AS(temporal_convergence_table({row(6, 1.0, 0.2), row(5, 0.5, 0.1)}), std::invalid_argument);
  }
  SUBCASE("csv") {
    std::ostringstream os;
    convergence_table({row(3, 4.0), row(4, 1.0)}).write_csv(os);
    const std::string s = os.str();
    CHECK(s.rfind("level,", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  }
}

TEST_CASE("nu-sweep comparison") {
  std::vector<ErrorReport> same;
  for (double nu : {1.0, 1e-2, 1e-4}) same.push_back(row(5, 0.3, 0.0625, nu));
  const NuSweepSummary s = nu_sweep_comparison(same);
  CHECK(s.robust());
  for (const auto& c : s.columns) CHECK(c.ratio == doctest::Approx(1.0));

  same[1].pressure_l2l2 = 0.45;
  const NuSweepSummary f = nu_sweep_comparison(same);
  CHECK_FALSE(f.robust());
  for (const auto& c : f.columns) {
    CHECK(c.flagged == (c.name == "pressure_l2l2"));
    if (c.flagged) CHECK(c.ratio == doctest::Approx(1.5));
  }
  CHECK(nu_sweep_comparison(same, 2.0).robust());
}
