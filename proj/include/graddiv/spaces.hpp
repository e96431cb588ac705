#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graddiv/elements.hpp"
#include "graddiv/mesh.hpp"

namespace graddiv {

using Vector = Eigen::VectorXd;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Affine map from the reference triangle onto one cell.
struct CellMap {
  Point origin;
  Eigen::Matrix2d jacobian;          // columns v1 - v0, v2 - v0
  Eigen::Matrix2d inverse_transpose;
  double det;

  explicit CellMap(const std::array<Point, 3>& v);

  Point to_physical(const Barycentric& l) const { return origin + jacobian * l.tail<2>(); }
  /// Physical gradients (rows) from reference gradients (rows).
  template <typename Derived>
  auto physical_gradients(const Eigen::MatrixBase<Derived>& ref) const {
    return (ref * inverse_transpose.transpose()).eval();
  }
};

/// Continuous Lagrange space (scalar or 2-vector) on a mesh.
///
/// Scalar numbering: vertices in mesh order, then edge midpoints ordered by
/// sorted (min, max) vertex pair, then cell bubbles in cell order. Vector
/// spaces are blocked by component: global dof = component * n_scalar + s.
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh> mesh, ElementFamily family, int components);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  ElementFamily family() const { return family_; }
  int components() const { return components_; }
  int n_scalar_dofs() const { return n_scalar_; }
  int n_dofs() const { return components_ * n_scalar_; }
  int local_size() const { return dofs_per_cell(family_); }

  /// Scalar dof indices of cell `c` (first local_size() entries valid).
  const std::array<int, kMaxCellDofs>& cell_dofs(int c) const { return cell_dofs_[c]; }
  int global_dof(int component, int scalar_dof) const { return component * n_scalar_ + scalar_dof; }

  /// Nodal point of a scalar dof; bubble dofs carry the barycenter.
  const Point& dof_coord(int s) const { return dof_coords_[s]; }
  bool is_bubble(int s) const { return s >= n_scalar_ - n_bubbles_; }
  bool scalar_dof_on_boundary(int s) const { return on_boundary_[s] != 0; }

  /// Sorted global dofs (all components) whose nodal point lies on the boundary.
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }

  std::string tag() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  ElementFamily family_;
  int components_;
  int n_scalar_ = 0;
  int n_bubbles_ = 0;
  std::vector<std::array<int, kMaxCellDofs>> cell_dofs_;
  std::vector<Point> dof_coords_;
  std::vector<char> on_boundary_;
  std::vector<int> boundary_dofs_;
};

using FESpacePtr = std::shared_ptr<const FESpace>;

FESpacePtr build_space(std::shared_ptr<const Mesh> mesh, ElementFamily family, int components);

enum class PairTag { TaylorHood21, Mini11 };

struct MixedSpace {
  FESpacePtr velocity;
  FESpacePtr pressure;
  PairTag pair;

  const Mesh& mesh() const { return velocity->mesh(); }
};

MixedSpace make_mixed_space(std::shared_ptr<const Mesh> mesh, PairTag pair);
std::string pair_name(PairTag pair);

/// Coefficient vector over a space.
class FEFunction {
 public:
  FEFunction() = default;
  explicit FEFunction(FESpacePtr space) : space_(std::move(space)), coeffs_(Vector::Zero(space_->n_dofs())) {}
  FEFunction(FESpacePtr space, Vector coeffs);

  const FESpace& space() const { return *space_; }
  const FESpacePtr& space_ptr() const { return space_; }
  const Vector& coeffs() const { return coeffs_; }
  Vector& coeffs() { return coeffs_; }

  /// Local coefficients of one component on one cell.
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxCellDofs, 1> local(int cell, int component = 0) const;

  double value(int cell, const Barycentric& l) const;
  Point gradient(int cell, const Barycentric& l) const;
  Point vector_value(int cell, const Barycentric& l) const;
  /// (i, j) = d u_i / d x_j.
  Eigen::Matrix2d vector_gradient(int cell, const Barycentric& l) const;

 private:
  FESpacePtr space_;
  Vector coeffs_;
};

/// Lagrange interpolant: nodal values of `g`, bubble coefficients zero.
FEFunction interpolate(FESpacePtr space, const ScalarField& g);
FEFunction interpolate(FESpacePtr space, const VectorField& g);

/// Integrals of the scalar basis functions.
Vector basis_integrals(const FESpace& space);

double mean_value(const FEFunction& p);
FEFunction enforce_zero_mean(FEFunction p);

/// L2 projection onto a scalar space (mass-matrix solve).
FEFunction l2_project_pressure(FESpacePtr space, const ScalarField& q);

/// `space <tag> ndofs N` followed by N coefficients with 17 significant digits.
void write_function(std::ostream& os, const FEFunction& f);

}  // namespace graddiv
