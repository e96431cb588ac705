#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace graddiv {

using Point = Eigen::Vector2d;

/// Sides of the unit square. Corner vertices carry two flags.
enum BoundarySide : std::uint8_t {
  kInterior = 0,
  kLeft = 1,
  kRight = 2,
  kBottom = 4,
  kTop = 8,
};

struct BoundaryEdge {
  std::array<int, 2> vertices;
  std::uint8_t side;
};

struct MeshStats {
  double h_max;
  double h_min;
  double total_area;
  int cell_count;
  int vertex_count;
};

/// Conforming triangulation of (0,1)^2.
///
/// Vertices are stored as integer lattice coordinates on the 2^-level grid, so
/// refinement deduplicates midpoints exactly. Cells are counter-clockwise
/// vertex triples. A mesh is immutable once built.
class Mesh {
 public:
  using Lattice = std::array<std::int64_t, 2>;

  /// Level-`level` uniform refinement of the two-triangle square, diagonal
  /// from (0,0) to (1,1). 2*4^level cells, (2^level+1)^2 vertices.
  static Mesh unit_square(int level);

  /// Red refinement: every cell split into four congruent children through
  /// its edge midpoints.
  Mesh refined() const;

  int level() const { return level_; }
  int n_vertices() const { return static_cast<int>(lattice_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }

  Point vertex(int i) const;
  const std::vector<Lattice>& lattice() const { return lattice_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  /// Side flags of vertex `i` (kInterior for interior vertices).
  std::uint8_t vertex_sides(int i) const { return vertex_sides_[i]; }
  bool on_boundary(int i) const { return vertex_sides_[i] != kInterior; }

  std::array<Point, 3> cell_vertices(int c) const;
  double signed_area(int c) const;
  double diameter(int c) const;

  double h_max() const { return h_max_; }
  double h_min() const { return h_min_; }

 private:
  Mesh(int level, std::vector<Lattice> lattice, std::vector<std::array<int, 3>> cells);
  void finalize();

  int level_ = 0;
  std::vector<Lattice> lattice_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::uint8_t> vertex_sides_;
  std::vector<BoundaryEdge> boundary_edges_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
};

inline Mesh unit_square_mesh(int level) { return Mesh::unit_square(level); }
inline Mesh refine_uniform(const Mesh& mesh) { return mesh.refined(); }

MeshStats mesh_stats(const Mesh& mesh);

/// Edge-hash audit: every edge is shared by at most two cells, boundary
/// edges (one cell) lie on the square boundary. Returns false on violation.
bool is_conforming(const Mesh& mesh);

/// `vertices N cells M`, N lines `x y`, M lines `i j k`.
void write_mesh(std::ostream& os, const Mesh& mesh);

}  // namespace graddiv
