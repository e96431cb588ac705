#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's assembly or solver code.

#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "graddiv/spaces.hpp"

namespace oracle {

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Integral of l0^a l1^b l2^c over a triangle of area `area`.
inline double barycentric_monomial(int a, int b, int c, double area = 0.5) {
  return factorial(a) * factorial(b) * factorial(c) * 2.0 * area / factorial(a + b + c + 2);
}

/// Integral of xi^i eta^j over the reference triangle.
inline double reference_monomial(int i, int j) { return barycentric_monomial(0, i, j); }

/// Gauss-Legendre nodes/weights on [0, 1] (Golub-Welsch, dense).
inline void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x = (es.eigenvalues().array() + 1.0) / 2.0;
  w = es.eigenvectors().row(0).transpose().array().square();  // sums to 1
}

/// Tensor Gauss integral of f over the unit square.
template <typename F>
double integrate_square(F&& f, int n = 20) {
  Eigen::VectorXd x, w;
  gauss_legendre(n, x, w);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += w(i) * w(j) * f(x(i), x(j));
  return s;
}

/// Hyper-dual number a + b e1 + c e2 + d e1e2 with e1^2 = e2^2 = 0: exact
/// first and mixed second derivatives.
struct HyperDual {
  double a = 0, b = 0, c = 0, d = 0;
  HyperDual() = default;
  HyperDual(double v) : a(v) {}  // NOLINT(google-explicit-constructor)
  HyperDual(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}
};
inline HyperDual operator+(const HyperDual& x, const HyperDual& y) { return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d}; }
inline HyperDual operator-(const HyperDual& x, const HyperDual& y) { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }
inline HyperDual operator*(const HyperDual& x, const HyperDual& y) {
  return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a, x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
}
inline HyperDual sin(const HyperDual& x) {
  const double s = std::sin(x.a), c = std::cos(x.a);
  return {s, c * x.b, c * x.c, c * x.d - s * x.b * x.c};
}
inline HyperDual cos(const HyperDual& x) {
  const double s = std::sin(x.a), c = std::cos(x.a);
  return {c, -s * x.b, -s * x.c, -s * x.d - c * x.b * x.c};
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20240611);
  return gen;
}

inline double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

/// Random coefficients, zero on the boundary dofs.
inline Eigen::VectorXd random_zero_trace(const graddiv::FESpace& space) {
  Eigen::VectorXd c(space.n_dofs());
  for (auto& v : c) v = uniform(-1.0, 1.0);
  for (int d : space.boundary_dofs()) c(d) = 0.0;
  return c;
}

inline graddiv::MixedSpace mixed(int level, graddiv::PairTag pair = graddiv::PairTag::TaylorHood21) {
  return graddiv::make_mixed_space(std::make_shared<const graddiv::Mesh>(graddiv::Mesh::unit_square(level)), pair);
}

inline double log2_ratio(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace oracle
