#include "graddiv/manufactured.hpp"

#include <numbers>

namespace graddiv {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::Matrix2d PaperSolution::velocity_gradient(const Point& x, double t) const {
  const double c = factor(t) * kPi;
  const double a = kPi * x.x() - 0.7, b = kPi * x.y() + 0.2;
  Eigen::Matrix2d g;
  g << c * std::cos(a) * std::sin(b), c * std::sin(a) * std::cos(b),  //
      -c * std::sin(a) * std::cos(b), -c * std::cos(a) * std::sin(b);
  return g;
}

Point PaperSolution::velocity_dt(const Point& x, double t) const {
  return velocity_t(x.x(), x.y(), factor_dt(t));
}

Point PaperSolution::velocity_laplacian(const Point& x, double t) const {
  return -2.0 * kPi * kPi * velocity(x, t);
}

Point PaperSolution::pressure_gradient(const Point& x, double t) const {
  const double c = factor(t);
  return {c * std::cos(x.x()) * std::cos(x.y()), -c * std::sin(x.x()) * std::sin(x.y())};
}

// (u . grad) u = cos^2 t pi (sin a cos a, -sin b cos b); -lap u = 2 pi^2 u.
Point PaperSolution::forcing(const Point& x, double t, double nu) const {
  const double c = factor(t);
  const double a = kPi * x.x() - 0.7, b = kPi * x.y() + 0.2;
  const Point convection = c * c * kPi * Point(std::sin(a) * std::cos(a), -std::sin(b) * std::cos(b));
  return velocity_dt(x, t) + 2.0 * nu * kPi * kPi * velocity(x, t) + convection + pressure_gradient(x, t);
}

std::shared_ptr<const ManufacturedSolution> paper_solution() { return std::make_shared<const PaperSolution>(); }

}  // namespace graddiv
