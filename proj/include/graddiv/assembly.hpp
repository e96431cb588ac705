#pragma once

#include <functional>
#include <iosfwd>

#include <Eigen/SparseCore>

#include "graddiv/spaces.hpp"

namespace graddiv {

/// Assembled bilinear form in compressed sparse row layout.
///
/// Every operator on a vector space is assembled with the full coupling
/// pattern of the space (all component pairs of every cell), explicit zeros
/// included. Mass, stiffness, grad-div and convection matrices on one space
/// therefore share a single sparsity pattern, and their linear combinations
/// keep it.
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

using SpaceTimeVectorField = std::function<Point(const Point&, double)>;

/// (M c_v, c_w) = (v_h, w_h). Block diagonal by component for vector spaces.
SparseOperator assemble_mass(const FESpace& space);

/// (K c_v, c_w) = (grad v_h, grad w_h).
SparseOperator assemble_stiffness(const FESpace& space);

/// n_pressure x n_velocity with (B c_v)_q = (q, div v_h). The pressure term
/// of the momentum equation is -B^T p.
SparseOperator assemble_divergence(const FESpace& velocity, const FESpace& pressure);

/// (G c_v, c_w) = (div v_h, div w_h); the grad-div weight is applied later.
SparseOperator assemble_graddiv(const FESpace& velocity);

enum class ConvectionForm {
  Picard,  // v -> b(w, v, z)
  Newton,  // v -> b(w, v, z) + b(v, w, z), the Jacobian of b(u, u, z) at w
};

/// c_z^T N(w) c_v = b(w, v_h, z_h) with the skew-symmetric form
/// B(w, v) = (w . grad) v + 1/2 (div w) v, integrated exactly for
/// polynomial data (degree deg(w) + 2 deg(v) - 1).
SparseOperator assemble_convection(const FEFunction& w, const FESpace& velocity,
                                   ConvectionForm form = ConvectionForm::Picard);

/// Entries (f, phi_i) for a vector space.
Vector assemble_load(const FESpace& velocity, const VectorField& f, int degree = kErrorQuadratureDegree);
Vector assemble_load(const FESpace& velocity, const SpaceTimeVectorField& f, double t,
                     int degree = kErrorQuadratureDegree);

/// Entries (q, psi_i) for a scalar space.
Vector assemble_scalar_load(const FESpace& space, const ScalarField& q, int degree = kErrorQuadratureDegree);

/// Matrix Market coordinate dump (1-based indices).
void write_matrix_market(std::ostream& os, const SparseOperator& op);

}  // namespace graddiv
