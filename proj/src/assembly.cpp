#include "graddiv/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace graddiv {

namespace {

using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxCellDofs, 2 * kMaxCellDofs>;
using LocalGradients = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, kMaxCellDofs, 2>;
using Triplets = std::vector<Eigen::Triplet<double, int>>;

// Per-quadrature-point data handed to local kernels.
struct PointData {
  const Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxCellDofs, 1>& phi;
  const LocalGradients& grad;  // physical
  double weight;               // rule weight times |det J|
  Point x;
};

// Loops over cells, calls `kernel(cell, point_data, local)` for every
// quadrature point, scatters the (components * n) square local matrix.
template <typename Kernel>
SparseOperator assemble_square(const FESpace& space, int degree, Kernel&& kernel) {
  const Mesh& mesh = space.mesh();
  const auto& rule = quadrature_rule(std::clamp(degree, 1, 10));
  const Tabulation tab = tabulate(space.family(), rule);
  const int n = space.local_size();
  const int nc = space.components();
  const int block = nc * n;

  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_cells()) * block * block);
  LocalMatrix local(block, block);
  std::array<int, 2 * kMaxCellDofs> idx{};

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh.cell_vertices(c));
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const LocalGradients grad = map.physical_gradients(tab.at[q].gradients);
      kernel(c, PointData{tab.at[q].values, grad, rule.weights[q] * std::abs(map.det), map.to_physical(rule.points[q])},
             local);
    }
    const auto& dofs = space.cell_dofs(c);
    for (int a = 0; a < nc; ++a)
      for (int i = 0; i < n; ++i) idx[a * n + i] = space.global_dof(a, dofs[i]);
    for (int r = 0; r < block; ++r)
      for (int s = 0; s < block; ++s) triplets.emplace_back(idx[r], idx[s], local(r, s));
  }

  SparseOperator op(space.n_dofs(), space.n_dofs());
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return op;
}

void require_vector(const FESpace& space, const char* what) {
  if (space.components() != 2) throw std::invalid_argument(std::string(what) + ": vector space expected");
}

}  // namespace

SparseOperator assemble_mass(const FESpace& space) {
  const int n = space.local_size();
  const int nc = space.components();
  return assemble_square(space, 2 * polynomial_degree(space.family()), [&](int, const PointData& p, LocalMatrix& m) {
    const auto block = (p.weight * p.phi * p.phi.transpose()).eval();
    for (int a = 0; a < nc; ++a) m.block(a * n, a * n, n, n) += block;
  });
}

SparseOperator assemble_stiffness(const FESpace& space) {
  const int n = space.local_size();
  const int nc = space.components();
  return assemble_square(space, 2 * polynomial_degree(space.family()) - 2,
                         [&](int, const PointData& p, LocalMatrix& m) {
                           const auto block = (p.weight * p.grad * p.grad.transpose()).eval();
                           for (int a = 0; a < nc; ++a) m.block(a * n, a * n, n, n) += block;
                         });
}

SparseOperator assemble_graddiv(const FESpace& velocity) {
  require_vector(velocity, "assemble_graddiv");
  const int n = velocity.local_size();
  return assemble_square(velocity, 2 * polynomial_degree(velocity.family()) - 2,
                         [&](int, const PointData& p, LocalMatrix& m) {
                           // Row (a, i), column (b, j): d_a phi_i d_b phi_j.
                           for (int a = 0; a < 2; ++a)
                             for (int b = 0; b < 2; ++b)
                               m.block(a * n, b * n, n, n) += p.weight * p.grad.col(a) * p.grad.col(b).transpose();
                         });
}

SparseOperator assemble_convection(const FEFunction& w, const FESpace& velocity, ConvectionForm form) {
  require_vector(velocity, "assemble_convection");
  const FESpace& wspace = w.space();
  if (wspace.components() != 2) throw std::invalid_argument("assemble_convection: vector field w expected");
  if (&wspace.mesh() != &velocity.mesh()) throw std::invalid_argument("assemble_convection: mesh mismatch");

  const int n = velocity.local_size();
  const int degree = polynomial_degree(wspace.family()) + 2 * polynomial_degree(velocity.family()) - 1;
  const auto& rule = quadrature_rule(std::clamp(degree, 1, 10));
  const Tabulation wtab = tabulate(wspace.family(), rule);
  const bool newton = form == ConvectionForm::Newton;

  // Field values of w at the quadrature points of the current cell.
  int cached_cell = -1;
  std::vector<Point> wval(rule.size());
  std::vector<Eigen::Matrix2d> wgrad(rule.size());
  int qcount = 0;

  return assemble_square(velocity, degree, [&](int c, const PointData& p, LocalMatrix& m) {
    if (c != cached_cell) {
      cached_cell = c;
      qcount = 0;
      const CellMap map(wspace.mesh().cell_vertices(c));
      const auto w0 = w.local(c, 0), w1 = w.local(c, 1);
      for (int q = 0; q < rule.size(); ++q) {
        const LocalGradients g = map.physical_gradients(wtab.at[q].gradients);
        wval[q] = {wtab.at[q].values.dot(w0), wtab.at[q].values.dot(w1)};
        wgrad[q].row(0) = (g.transpose() * w0).transpose();
        wgrad[q].row(1) = (g.transpose() * w1).transpose();
      }
    }
    const int q = qcount++;
    const Point& wq = wval[q];
    const Eigen::Matrix2d& gw = wgrad[q];
    const double divw = gw.trace();

    // Picard part, diagonal in components: phi_i [w . grad phi_j + 1/2 div w phi_j].
    const auto trial = (p.grad * wq + 0.5 * divw * p.phi).eval();
    const auto block = (p.weight * p.phi * trial.transpose()).eval();
    m.block(0, 0, n, n) += block;
    m.block(n, n, n, n) += block;

    if (newton) {
      // b(v, w, z) for v = phi_j e_b, z = phi_i e_a: phi_i [phi_j d_b w_a + 1/2 d_b phi_j w_a].
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const auto col = (gw(a, b) * p.phi + 0.5 * wq(a) * p.grad.col(b)).eval();
          m.block(a * n, b * n, n, n) += p.weight * p.phi * col.transpose();
        }
    }
  });
}

SparseOperator assemble_divergence(const FESpace& velocity, const FESpace& pressure) {
  require_vector(velocity, "assemble_divergence");
  if (pressure.components() != 1) throw std::invalid_argument("assemble_divergence: scalar pressure space expected");
  if (&velocity.mesh() != &pressure.mesh()) throw std::invalid_argument("assemble_divergence: mesh mismatch");

  const Mesh& mesh = velocity.mesh();
  const int degree = polynomial_degree(velocity.family()) - 1 + polynomial_degree(pressure.family());
  const auto& rule = quadrature_rule(std::max(degree, 1));
  const Tabulation vtab = tabulate(velocity.family(), rule);
  const Tabulation ptab = tabulate(pressure.family(), rule);
  const int nv = velocity.local_size();
  const int np = pressure.local_size();

  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_cells()) * np * 2 * nv);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxCellDofs, 2 * kMaxCellDofs> local(np, 2 * nv);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh.cell_vertices(c));
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const double wq = rule.weights[q] * std::abs(map.det);
      const LocalGradients grad = map.physical_gradients(vtab.at[q].gradients);
      for (int b = 0; b < 2; ++b) local.block(0, b * nv, np, nv) += wq * ptab.at[q].values * grad.col(b).transpose();
    }
    const auto& vd = velocity.cell_dofs(c);
    const auto& pd = pressure.cell_dofs(c);
    for (int k = 0; k < np; ++k)
      for (int b = 0; b < 2; ++b)
        for (int j = 0; j < nv; ++j) triplets.emplace_back(pd[k], velocity.global_dof(b, vd[j]), local(k, b * nv + j));
  }
  SparseOperator op(pressure.n_dofs(), velocity.n_dofs());
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return op;
}

Vector assemble_load(const FESpace& velocity, const VectorField& f, int degree) {
  require_vector(velocity, "assemble_load");
  const Mesh& mesh = velocity.mesh();
  const auto& rule = quadrature_rule(degree);
  const Tabulation tab = tabulate(velocity.family(), rule);
  const int n = velocity.local_size();
  Vector load = Vector::Zero(velocity.n_dofs());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh.cell_vertices(c));
    const auto& dofs = velocity.cell_dofs(c);
    for (int q = 0; q < rule.size(); ++q) {
      const double wq = rule.weights[q] * std::abs(map.det);
      const Point fq = f(map.to_physical(rule.points[q]));
      for (int i = 0; i < n; ++i) {
        const double phi = wq * tab.at[q].values(i);
        load(velocity.global_dof(0, dofs[i])) += phi * fq.x();
        load(velocity.global_dof(1, dofs[i])) += phi * fq.y();
      }
    }
  }
  return load;
}

Vector assemble_load(const FESpace& velocity, const SpaceTimeVectorField& f, double t, int degree) {
  return assemble_load(velocity, VectorField([&](const Point& x) { return f(x, t); }), degree);
}

Vector assemble_scalar_load(const FESpace& space, const ScalarField& q, int degree) {
  if (space.components() != 1) throw std::invalid_argument("assemble_scalar_load: scalar space expected");
  const Mesh& mesh = space.mesh();
  const auto& rule = quadrature_rule(degree);
  const Tabulation tab = tabulate(space.family(), rule);
  Vector load = Vector::Zero(space.n_dofs());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map(mesh.cell_vertices(c));
    const auto& dofs = space.cell_dofs(c);
    for (int k = 0; k < rule.size(); ++k) {
      const double wq = rule.weights[k] * std::abs(map.det) * q(map.to_physical(rule.points[k]));
      for (int i = 0; i < space.local_size(); ++i) load(dofs[i]) += wq * tab.at[k].values(i);
    }
  }
  return load;
}

void write_matrix_market(std::ostream& os, const SparseOperator& op) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << op.rows() << ' ' << op.cols() << ' ' << op.nonZeros() << '\n';
  const auto old_precision = os.precision(17);
  for (int r = 0; r < op.outerSize(); ++r)
    for (SparseOperator::InnerIterator it(op, r); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  os.precision(old_precision);
}

}  // namespace graddiv
