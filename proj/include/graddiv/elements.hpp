#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace graddiv {

enum class ElementFamily { P1, P2, P1Bubble };

constexpr int kMaxCellDofs = 6;

constexpr int dofs_per_cell(ElementFamily f) {
  switch (f) {
    case ElementFamily::P1: return 3;
    case ElementFamily::P2: return 6;
    case ElementFamily::P1Bubble: return 4;
  }
  return 0;
}

/// Highest total degree of the local shape functions (3 for the bubble space).
constexpr int polynomial_degree(ElementFamily f) {
  switch (f) {
    case ElementFamily::P1: return 1;
    case ElementFamily::P2: return 2;
    case ElementFamily::P1Bubble: return 3;
  }
  return 0;
}

std::string_view family_name(ElementFamily f);

using Barycentric = Eigen::Vector3d;

/// Shape function values and gradients with respect to the reference
/// coordinates (xi, eta) of the triangle (0,0), (1,0), (0,1).
template <typename Scalar>
struct BasisValues {
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxCellDofs, 1>;
  using Gradients = Eigen::Matrix<Scalar, Eigen::Dynamic, 2, 0, kMaxCellDofs, 2>;
  Values values;
  Gradients gradients;
};

/// Local ordering: vertex functions 0,1,2; P2 adds the midpoints of edges
/// (0,1), (1,2), (2,0); P1Bubble adds 27*l0*l1*l2 as local dof 3.
/// Barycentric l0 = 1 - xi - eta, l1 = xi, l2 = eta.
template <typename Scalar>
BasisValues<Scalar> eval_basis_unchecked(ElementFamily family, const Eigen::Matrix<Scalar, 3, 1>& l) {
  const int n = dofs_per_cell(family);
  BasisValues<Scalar> out;
  out.values.resize(n);
  out.gradients.resize(n, 2);
  // d l_i / d(xi, eta)
  const Scalar dl[3][2] = {{Scalar(-1), Scalar(-1)}, {Scalar(1), Scalar(0)}, {Scalar(0), Scalar(1)}};

  switch (family) {
    case ElementFamily::P1:
      for (int i = 0; i < 3; ++i) {
        out.values(i) = l(i);
        out.gradients(i, 0) = dl[i][0];
        out.gradients(i, 1) = dl[i][1];
      }
      break;
    case ElementFamily::P2:
      for (int i = 0; i < 3; ++i) {
        out.values(i) = l(i) * (Scalar(2) * l(i) - Scalar(1));
        const Scalar s = Scalar(4) * l(i) - Scalar(1);
        out.gradients(i, 0) = s * dl[i][0];
        out.gradients(i, 1) = s * dl[i][1];
      }
      for (int e = 0; e < 3; ++e) {
        const int a = e, b = (e + 1) % 3;
        out.values(3 + e) = Scalar(4) * l(a) * l(b);
        for (int d = 0; d < 2; ++d)
          out.gradients(3 + e, d) = Scalar(4) * (dl[a][d] * l(b) + l(a) * dl[b][d]);
      }
      break;
    case ElementFamily::P1Bubble:
      for (int i = 0; i < 3; ++i) {
        out.values(i) = l(i);
        out.gradients(i, 0) = dl[i][0];
        out.gradients(i, 1) = dl[i][1];
      }
      out.values(3) = Scalar(27) * l(0) * l(1) * l(2);
      for (int d = 0; d < 2; ++d)
        out.gradients(3, d) =
            Scalar(27) * (dl[0][d] * l(1) * l(2) + l(0) * dl[1][d] * l(2) + l(0) * l(1) * dl[2][d]);
      break;
  }
  return out;
}

/// Throws std::invalid_argument unless `l` is a valid barycentric point
/// (nonnegative, summing to 1 within 1e-12).
BasisValues<double> eval_basis(ElementFamily family, const Barycentric& l);

struct QuadratureRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;  // sum to 1/2, the reference area
  int exact_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Fully symmetric rule exact at least to `min_degree` (1..10).
const QuadratureRule& quadrature_rule(int min_degree);

/// Precomputed shape functions at the points of one rule.
struct Tabulation {
  ElementFamily family;
  std::vector<BasisValues<double>> at;
};

Tabulation tabulate(ElementFamily family, const QuadratureRule& rule);

/// Degree for operator assembly: 3k-1 with k the velocity degree, which
/// integrates the convection trilinear form exactly.
constexpr int assembly_degree(ElementFamily f) { return 3 * polynomial_degree(f) - 1; }

/// Degree used for errors against non-polynomial exact solutions.
constexpr int kErrorQuadratureDegree = 8;

}  // namespace graddiv
