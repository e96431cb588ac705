#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "graddiv/mesh.hpp"

using namespace graddiv;

namespace {

// Cell as a sorted triple of lattice coordinates on a common 2^-level grid.
using CellKey = std::array<std::array<long, 2>, 3>;

std::set<CellKey> cell_set(const Mesh& m) {
  std::set<CellKey> out;
  for (const auto& c : m.cells()) {
    CellKey k;
    for (int i = 0; i < 3; ++i) k[i] = {static_cast<long>(m.lattice()[c[i]][0]), static_cast<long>(m.lattice()[c[i]][1])};
    std::sort(k.begin(), k.end());
    out.insert(k);
  }
  return out;
}

}  // namespace

TEST_CASE("level 0 is two cells with the diagonal from (0,0) to (1,1)") {
  const Mesh m = unit_square_mesh(0);
  CHECK(m.n_cells() == 2);
  CHECK(m.n_vertices() == 4);
  // Both cells contain the corners (0,0) and (1,1).
  for (int c = 0; c < 2; ++c) {
    bool has00 = false, has11 = false;
    for (const Point& p : m.cell_vertices(c)) {
      has00 = has00 || (p - Point(0, 0)).norm() == 0.0;
      has11 = has11 || (p - Point(1, 1)).norm() == 0.0;
    }
    CHECK(has00);
    CHECK(has11);
  }
}

TEST_CASE("cell and vertex counts follow 2*4^L and (2^L+1)^2") {
  for (int level : {1, 3, 5}) {
    const Mesh m = unit_square_mesh(level);
    const int n = 1 << level;
    CHECK(m.n_cells() == 2 * n * n);
    CHECK(m.n_vertices() == (n + 1) * (n + 1));
    CHECK(m.level() == level);
  }
  CHECK(unit_square_mesh(1).n_cells() == 8);
  CHECK(unit_square_mesh(1).n_vertices() == 9);
  CHECK(unit_square_mesh(3).n_cells() == 128);
  CHECK(unit_square_mesh(3).n_vertices() == 81);
}

TEST_CASE("mesh invariants hold on every level") {
  for (int level = 0; level <= 5; ++level) {
    const Mesh m = unit_square_mesh(level);
    const MeshStats s = mesh_stats(m);
    double min_area = 1.0;
    for (int c = 0; c < m.n_cells(); ++c) min_area = std::min(min_area, m.signed_area(c));
    CHECK(min_area > 0.0);
    CHECK(std::abs(s.total_area - 1.0) <= 1e-12);
    CHECK(is_conforming(m));
    CHECK(s.h_max == doctest::Approx(std::sqrt(2.0) / (1 << level)).epsilon(1e-15));
    // Right isosceles cells: every cell has the same diameter.
    CHECK(s.h_max / s.h_min == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.cell_count == m.n_cells());
    CHECK(s.vertex_count == m.n_vertices());
  }
}

TEST_CASE("boundary edges lie on the boundary and boundary vertices are flagged") {
  const Mesh m = unit_square_mesh(3);
  const int n = 8;
  CHECK(static_cast<int>(m.boundary_edges().size()) == 4 * n);
  for (const auto& e : m.boundary_edges()) {
    const Point a = m.vertex(e.vertices[0]), b = m.vertex(e.vertices[1]);
    CHECK(e.side != kInterior);
    if (e.side == kLeft) CHECK((a.x() == 0.0 && b.x() == 0.0));
    if (e.side == kRight) CHECK((a.x() == 1.0 && b.x() == 1.0));
    if (e.side == kBottom) CHECK((a.y() == 0.0 && b.y() == 0.0));
    if (e.side == kTop) CHECK((a.y() == 1.0 && b.y() == 1.0));
  }
  for (int v = 0; v < m.n_vertices(); ++v) {
    const Point p = m.vertex(v);
    const bool on = p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0;
    CHECK(m.on_boundary(v) == on);
  }
  // Corners carry two flags.
  for (int v = 0; v < m.n_vertices(); ++v) {
    const Point p = m.vertex(v);
    if (p == Point(0, 0)) CHECK(m.vertex_sides(v) == (kLeft | kBottom));
    if (p == Point(1, 1)) CHECK(m.vertex_sides(v) == (kRight | kTop));
  }
}

TEST_CASE("refinement") {
  const Mesh coarse = unit_square_mesh(2);
  const Mesh fine = refine_uniform(coarse);
  CHECK(fine.n_cells() == 4 * coarse.n_cells());
  CHECK(fine.level() == coarse.level() + 1);
  CHECK(fine.h_max() == coarse.h_max() / 2);
  CHECK(std::abs(mesh_stats(fine).total_area - 1.0) <= 1e-12);

  SUBCASE("unit_square(L+1) equals refine(unit_square(L)) as a cell set") {
    for (int level = 0; level <= 4; ++level)
      CHECK(cell_set(unit_square_mesh(level + 1)) == cell_set(refine_uniform(unit_square_mesh(level))));
  }
}

TEST_CASE("mesh dump format") {
  const Mesh m = unit_square_mesh(1);
  std::ostringstream os;
  write_mesh(os, m);
  std::istringstream is(os.str());
  std::string w1, w2;
  int nv = 0, nc = 0;
  is >> w1 >> nv >> w2 >> nc;
  CHECK(w1 == "vertices");
  CHECK(w2 == "cells");
  CHECK(nv == 9);
  CHECK(nc == 8);
  for (int i = 0; i < nv; ++i) {
    double x, y;
    is >> x >> y;
    CHECK(Point(x, y) == m.vertex(i));
  }
  for (int c = 0; c < nc; ++c) {
    int a, b, d;
    is >> a >> b >> d;
    CHECK(std::array<int, 3>{a, b, d} == m.cells()[c]);
  }
  CHECK(is.good());
}
