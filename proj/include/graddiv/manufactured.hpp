#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "graddiv/mesh.hpp"

namespace graddiv {

/// Exact velocity/pressure pair of the incompressible Navier-Stokes
/// equations with the forcing that makes it a solution:
///   f = du/dt - nu lap u + (u . grad) u + grad p.
class ManufacturedSolution {
 public:
  virtual ~ManufacturedSolution() = default;

  virtual std::string name() const = 0;
  virtual Point velocity(const Point& x, double t) const = 0;
  /// (i, j) = d u_i / d x_j.
  virtual Eigen::Matrix2d velocity_gradient(const Point& x, double t) const = 0;
  virtual Point velocity_dt(const Point& x, double t) const = 0;
  virtual Point velocity_laplacian(const Point& x, double t) const = 0;
  virtual double pressure(const Point& x, double t) const = 0;
  virtual Point pressure_gradient(const Point& x, double t) const = 0;

  virtual Point forcing(const Point& x, double t, double nu) const {
    const Point u = velocity(x, t);
    return velocity_dt(x, t) - nu * velocity_laplacian(x, t) + velocity_gradient(x, t) * u +
           pressure_gradient(x, t);
  }
};

/// u = cos t (sin(pi x - 0.7) sin(pi y + 0.2), cos(pi x - 0.7) cos(pi y + 0.2)),
/// p = cos t (sin x cos y + (cos 1 - 1) sin 1).
///
/// The field formulas are templates so they can be evaluated with
/// automatic-differentiation scalars; the forcing is written out by hand.
class PaperSolution final : public ManufacturedSolution {
 public:
  /// `time_dependent = false` drops the cos t factor (steady variant).
  explicit PaperSolution(bool time_dependent = true) : time_dependent_(time_dependent) {}

  template <typename S>
  static Eigen::Matrix<S, 2, 1> velocity_t(const S& x, const S& y, const S& time_factor) {
    using std::cos;
    using std::sin;
    const S a = S(std::numbers::pi) * x - S(0.7);
    const S b = S(std::numbers::pi) * y + S(0.2);
    return {time_factor * sin(a) * sin(b), time_factor * cos(a) * cos(b)};
  }

  template <typename S>
  static S pressure_t(const S& x, const S& y, const S& time_factor) {
    using std::cos;
    using std::sin;
    return time_factor * (sin(x) * cos(y) + S((std::cos(1.0) - 1.0) * std::sin(1.0)));
  }

  std::string name() const override { return time_dependent_ ? "paper" : "paper_steady"; }
  Point velocity(const Point& x, double t) const override { return velocity_t(x.x(), x.y(), factor(t)); }
  Eigen::Matrix2d velocity_gradient(const Point& x, double t) const override;
  Point velocity_dt(const Point& x, double t) const override;
  Point velocity_laplacian(const Point& x, double t) const override;
  double pressure(const Point& x, double t) const override { return pressure_t(x.x(), x.y(), factor(t)); }
  Point pressure_gradient(const Point& x, double t) const override;
  Point forcing(const Point& x, double t, double nu) const override;

 private:
  double factor(double t) const { return time_dependent_ ? std::cos(t) : 1.0; }
  double factor_dt(double t) const { return time_dependent_ ? -std::sin(t) : 0.0; }

  bool time_dependent_;
};

/// Steady polynomial pair representable by Taylor-Hood:
/// u = (x^2, -2xy), p = x - 1/2.
class QuadraticSolution final : public ManufacturedSolution {
 public:
  std::string name() const override { return "quadratic"; }
  Point velocity(const Point& x, double) const override { return {x.x() * x.x(), -2.0 * x.x() * x.y()}; }
  Eigen::Matrix2d velocity_gradient(const Point& x, double) const override {
    Eigen::Matrix2d g;
    g << 2.0 * x.x(), 0.0, -2.0 * x.y(), -2.0 * x.x();
    return g;
  }
  Point velocity_dt(const Point&, double) const override { return Point::Zero(); }
  Point velocity_laplacian(const Point&, double) const override { return {2.0, 0.0}; }
  double pressure(const Point& x, double) const override { return x.x() - 0.5; }
  Point pressure_gradient(const Point&, double) const override { return {1.0, 0.0}; }
};

/// u = 0, p = 0, f = 0.
class ZeroSolution final : public ManufacturedSolution {
 public:
  std::string name() const override { return "zero"; }
  Point velocity(const Point&, double) const override { return Point::Zero(); }
  Eigen::Matrix2d velocity_gradient(const Point&, double) const override { return Eigen::Matrix2d::Zero(); }
  Point velocity_dt(const Point&, double) const override { return Point::Zero(); }
  Point velocity_laplacian(const Point&, double) const override { return Point::Zero(); }
  double pressure(const Point&, double) const override { return 0.0; }
  Point pressure_gradient(const Point&, double) const override { return Point::Zero(); }
  Point forcing(const Point&, double, double) const override { return Point::Zero(); }
};

std::shared_ptr<const ManufacturedSolution> paper_solution();

}  // namespace graddiv
