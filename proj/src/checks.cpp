// Fast invariant suite run by `graddiv-ns check`.

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "graddiv/experiment.hpp"

namespace graddiv {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

CheckResult check(const std::string& name, const std::function<std::string(bool&)>& body) {
  CheckResult r{name, false, {}};
  try {
    r.detail = body(r.passed);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Vector random_zero_trace(const FESpace& space, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector c(space.n_dofs());
  for (auto& v : c) v = dist(rng);
  for (int d : space.boundary_dofs()) c(d) = 0.0;
  return c;
}

}  // namespace

std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> out;

  out.push_back(check("quadrature exactness", [](bool& ok) {
    double worst = 0.0;
    for (int deg = 1; deg <= 10; ++deg) {
      const auto& rule = quadrature_rule(deg);
      for (int i = 0; i <= rule.exact_degree; ++i)
        for (int j = 0; i + j <= rule.exact_degree; ++j) {
          double q = 0.0;
          for (int k = 0; k < rule.size(); ++k)
            q += rule.weights[k] * std::pow(rule.points[k](1), i) * std::pow(rule.points[k](2), j);
          worst = std::max(worst, std::abs(q - factorial(i) * factorial(j) / factorial(i + j + 2)));
        }
    }
    ok = worst <= 1e-13;
    return "max monomial error " + sci(worst);
  }));

  out.push_back(check("P1 cell mass matrix", [](bool& ok) {
    const auto mesh = std::make_shared<const Mesh>(Mesh::unit_square(0));
    const auto space = build_space(mesh, ElementFamily::P1, 1);
    const Eigen::MatrixXd M(assemble_mass(*space));
    // Two cells of area 1/2 sharing the diagonal (0, 3).
    Eigen::Matrix4d oracle = Eigen::Matrix4d::Zero();
    for (const auto& cell : mesh->cells())
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) oracle(cell[a], cell[b]) += 0.5 / 12.0 * (a == b ? 2.0 : 1.0);
    const double err = (M - oracle).cwiseAbs().maxCoeff();
    ok = err <= 1e-13;
    return "max entry error " + sci(err);
  }));

  out.push_back(check("manufactured forcing", [](bool& ok) {
    const PaperSolution u;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (double nu : {1.0, 1e-2, 1e-4, 1e-6})
      for (int s = 0; s < 100; ++s) {
        const Point x(unit(rng), unit(rng));
        const double t = 5.0 * unit(rng);
        const Point generic = u.velocity_dt(x, t) - nu * u.velocity_laplacian(x, t) +
                              u.velocity_gradient(x, t) * u.velocity(x, t) + u.pressure_gradient(x, t);
        worst = std::max(worst, (u.forcing(x, t, nu) - generic).norm());
        worst = std::max(worst, std::abs(u.velocity_gradient(x, t).trace()));
      }
    ok = worst <= 1e-12;
    return "max residual " + sci(worst);
  }));

  out.push_back(check("degrees of freedom", [](bool& ok) {
    const auto sp = make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(3)), PairTag::TaylorHood21);
    ok = sp.velocity->n_dofs() == 578 && sp.pressure->n_dofs() == 81;
    return "level 3 Taylor-Hood " + std::to_string(sp.velocity->n_dofs()) + "/" +
           std::to_string(sp.pressure->n_dofs());
  }));

  out.push_back(check("convection skew-symmetry", [](bool& ok) {
    std::mt19937 rng(11);
    double worst = 0.0;
    for (PairTag pair : {PairTag::TaylorHood21, PairTag::Mini11}) {
      const auto sp = make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(3)), pair);
      const SparseOperator H1 = assemble_mass(*sp.velocity) + assemble_stiffness(*sp.velocity);
      for (int s = 0; s < 5; ++s) {
        const FEFunction w(sp.velocity, random_zero_trace(*sp.velocity, rng));
        const Vector v = random_zero_trace(*sp.velocity, rng);
        const double b = v.dot(assemble_convection(w, *sp.velocity) * v);
        const double scale = std::sqrt(w.coeffs().dot(H1 * w.coeffs())) * v.dot(H1 * v);
        worst = std::max(worst, std::abs(b) / scale);
      }
    }
    ok = worst <= 1e-12;
    return "max |b(w,v,v)| / (|w|_1 |v|_1^2) " + sci(worst);
  }));

  out.push_back(check("discrete Leray projection", [](bool& ok) {
    std::mt19937 rng(3);
    const auto sp = make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(2)), PairTag::TaylorHood21);
    const FEFunction v(sp.velocity, random_zero_trace(*sp.velocity, rng));
    const FEFunction pv = discrete_leray_project(v, sp);
    const Vector div = assemble_divergence(*sp.velocity, *sp.pressure) * pv.coeffs();
    ok = div.cwiseAbs().maxCoeff() <= 1e-11;
    return "max |(div P v, q)| " + sci(div.cwiseAbs().maxCoeff());
  }));

  out.push_back(check("inf-sup constant", [](bool& ok) {
    std::ostringstream os;
    ok = true;
    for (PairTag pair : {PairTag::TaylorHood21, PairTag::Mini11}) {
      const auto est = estimate_inf_sup(make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(2)), pair));
      ok = ok && est.beta_h > 0.0;
      os << pair_name(pair) << " beta_h " << est.beta_h << ' ';
    }
    return os.str();
  }));

  out.push_back(check("backward Euler energy decay", [](bool& ok) {
    std::mt19937 rng(5);
    const auto sp = make_mixed_space(std::make_shared<const Mesh>(Mesh::unit_square(2)), PairTag::TaylorHood21);
    SchemeConfig cfg;
    cfg.scheme = Scheme::BackwardEuler;
    cfg.dt = 0.05;
    cfg.t_end = 0.5;
    cfg.nu = 1e-3;
    TransientSolver solver(sp, std::make_shared<ZeroSolution>(), cfg);
    FlowState s = solver.initial_state();
    s.velocity = random_zero_trace(*sp.velocity, rng);
    const SparseOperator M = assemble_mass(*sp.velocity);
    double prev = std::sqrt(s.velocity.dot(M * s.velocity));
    double worst = -1.0;
    for (int n = 0; n < 10; ++n) {
      s = solver.step(s);
      const double e = std::sqrt(s.velocity.dot(M * s.velocity));
      worst = std::max(worst, e - prev);
      prev = e;
    }
    ok = worst <= 1e-12;
    return "max norm increase " + sci(worst);
  }));

  return out;
}

}  // namespace graddiv
