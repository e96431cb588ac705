#include "graddiv/spaces.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include "graddiv/assembly.hpp"

namespace graddiv {

CellMap::CellMap(const std::array<Point, 3>& v) : origin(v[0]) {
  jacobian.col(0) = v[1] - v[0];
  jacobian.col(1) = v[2] - v[0];
  det = jacobian.determinant();
  inverse_transpose = jacobian.inverse().transpose();
}

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, ElementFamily family, int components)
    : mesh_(std::move(mesh)), family_(family), components_(components) {
  if (components != 1 && components != 2) throw std::invalid_argument("FESpace: components must be 1 or 2");
  const Mesh& m = *mesh_;
  const int nv = m.n_vertices();
  cell_dofs_.assign(m.n_cells(), {});
  for (int c = 0; c < m.n_cells(); ++c)
    for (int i = 0; i < 3; ++i) cell_dofs_[c][i] = m.cells()[c][i];

  dof_coords_.reserve(nv);
  on_boundary_.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    dof_coords_.push_back(m.vertex(i));
    on_boundary_.push_back(m.on_boundary(i) ? 1 : 0);
  }

  if (family_ == ElementFamily::P2) {
    std::map<std::pair<int, int>, int> edge_index;
    for (const auto& cell : m.cells())
      for (int e = 0; e < 3; ++e) {
        const int a = cell[e], b = cell[(e + 1) % 3];
        edge_index.emplace(std::minmax(a, b), 0);
      }
    int next = nv;
    for (auto& [key, idx] : edge_index) {
      idx = next++;
      dof_coords_.push_back(0.5 * (m.vertex(key.first) + m.vertex(key.second)));
      // An edge is on the boundary iff both endpoints share a side.
      on_boundary_.push_back((m.vertex_sides(key.first) & m.vertex_sides(key.second)) != kInterior ? 1 : 0);
    }
    for (int c = 0; c < m.n_cells(); ++c) {
      const auto& cell = m.cells()[c];
      for (int e = 0; e < 3; ++e) {
        const int a = cell[e], b = cell[(e + 1) % 3];
        cell_dofs_[c][3 + e] = edge_index.at(std::minmax(a, b));
      }
    }
  } else if (family_ == ElementFamily::P1Bubble) {
    n_bubbles_ = m.n_cells();
    for (int c = 0; c < m.n_cells(); ++c) {
      cell_dofs_[c][3] = static_cast<int>(dof_coords_.size());
      const auto v = m.cell_vertices(c);
      dof_coords_.push_back((v[0] + v[1] + v[2]) / 3.0);
      on_boundary_.push_back(0);
    }
  }

  n_scalar_ = static_cast<int>(dof_coords_.size());
  for (int comp = 0; comp < components_; ++comp)
    for (int s = 0; s < n_scalar_; ++s)
      if (on_boundary_[s]) boundary_dofs_.push_back(global_dof(comp, s));
}

std::string FESpace::tag() const {
  std::string t(family_name(family_));
  if (components_ == 2) t += "x2";
  return t;
}

FESpacePtr build_space(std::shared_ptr<const Mesh> mesh, ElementFamily family, int components) {
  return std::make_shared<const FESpace>(std::move(mesh), family, components);
}

MixedSpace make_mixed_space(std::shared_ptr<const Mesh> mesh, PairTag pair) {
  const ElementFamily vel = pair == PairTag::TaylorHood21 ? ElementFamily::P2 : ElementFamily::P1Bubble;
  return {build_space(mesh, vel, 2), build_space(mesh, ElementFamily::P1, 1), pair};
}

std::string pair_name(PairTag pair) { return pair == PairTag::TaylorHood21 ? "taylor_hood" : "mini"; }

FEFunction::FEFunction(FESpacePtr space, Vector coeffs) : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != space_->n_dofs()) throw std::invalid_argument("FEFunction: coefficient length mismatch");
}

Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxCellDofs, 1> FEFunction::local(int cell, int component) const {
  const int n = space_->local_size();
  const auto& dofs = space_->cell_dofs(cell);
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxCellDofs, 1> out(n);
  for (int i = 0; i < n; ++i) out(i) = coeffs_(space_->global_dof(component, dofs[i]));
  return out;
}

double FEFunction::value(int cell, const Barycentric& l) const {
  return eval_basis(space_->family(), l).values.dot(local(cell));
}

Point FEFunction::gradient(int cell, const Barycentric& l) const {
  const CellMap map(space_->mesh().cell_vertices(cell));
  const auto grads = map.physical_gradients(eval_basis(space_->family(), l).gradients);
  return grads.transpose() * local(cell);
}

Point FEFunction::vector_value(int cell, const Barycentric& l) const {
  const auto phi = eval_basis(space_->family(), l).values;
  return {phi.dot(local(cell, 0)), phi.dot(local(cell, 1))};
}

Eigen::Matrix2d FEFunction::vector_gradient(int cell, const Barycentric& l) const {
  const CellMap map(space_->mesh().cell_vertices(cell));
  const auto grads = map.physical_gradients(eval_basis(space_->family(), l).gradients);
  Eigen::Matrix2d g;
  g.row(0) = (grads.transpose() * local(cell, 0)).transpose();
  g.row(1) = (grads.transpose() * local(cell, 1)).transpose();
  return g;
}

FEFunction interpolate(FESpacePtr space, const ScalarField& g) {
  if (space->components() != 1) throw std::invalid_argument("interpolate: scalar field on vector space");
  FEFunction f(space);
  for (int s = 0; s < space->n_scalar_dofs(); ++s)
    if (!space->is_bubble(s)) f.coeffs()(s) = g(space->dof_coord(s));
  return f;
}

FEFunction interpolate(FESpacePtr space, const VectorField& g) {
  if (space->components() != 2) throw std::invalid_argument("interpolate: vector field on scalar space");
  FEFunction f(space);
  for (int s = 0; s < space->n_scalar_dofs(); ++s) {
    if (space->is_bubble(s)) continue;
    const Point v = g(space->dof_coord(s));
    f.coeffs()(space->global_dof(0, s)) = v.x();
    f.coeffs()(space->global_dof(1, s)) = v.y();
  }
  return f;
}

Vector basis_integrals(const FESpace& space) {
  const auto& rule = quadrature_rule(polynomial_degree(space.family()));
  const Tabulation tab = tabulate(space.family(), rule);
  Vector w = Vector::Zero(space.n_scalar_dofs());
  const Mesh& mesh = space.mesh();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double det = std::abs(CellMap(mesh.cell_vertices(c)).det);
    const auto& dofs = space.cell_dofs(c);
    for (int q = 0; q < rule.size(); ++q)
      for (int i = 0; i < space.local_size(); ++i) w(dofs[i]) += rule.weights[q] * det * tab.at[q].values(i);
  }
  return w;
}

double mean_value(const FEFunction& p) {
  if (p.space().components() != 1) throw std::invalid_argument("mean_value: scalar function expected");
  // The domain is the unit square.
  return basis_integrals(p.space()).dot(p.coeffs());
}

FEFunction enforce_zero_mean(FEFunction p) {
  const double m = mean_value(p);
  // Nodal functions alone form a partition of unity; bubbles stay untouched.
  for (int s = 0; s < p.space().n_scalar_dofs(); ++s)
    if (!p.space().is_bubble(s)) p.coeffs()(s) -= m;
  return p;
}

FEFunction l2_project_pressure(FESpacePtr space, const ScalarField& q) {
  if (space->components() != 1) throw std::invalid_argument("l2_project_pressure: scalar space expected");
  const SparseOperator mass = assemble_mass(*space);
  const Vector rhs = assemble_scalar_load(*space, q, kErrorQuadratureDegree);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mass);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("l2_project_pressure: singular mass matrix");
  return FEFunction(std::move(space), ldlt.solve(rhs));
}

void write_function(std::ostream& os, const FEFunction& f) {
  os << "space " << f.space().tag() << " ndofs " << f.coeffs().size() << '\n';
  const auto old_precision = os.precision(17);
  for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) os << f.coeffs()(i) << '\n';
  os.precision(old_precision);
}

}  // namespace graddiv
