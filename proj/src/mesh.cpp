#include "graddiv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace graddiv {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::map<EdgeKey, int> count_edges(const std::vector<std::array<int, 3>>& cells) {
  std::map<EdgeKey, int> count;
  for (const auto& c : cells)
    for (int e = 0; e < 3; ++e) ++count[edge_key(c[e], c[(e + 1) % 3])];
  return count;
}

}  // namespace

Mesh::Mesh(int level, std::vector<Lattice> lattice, std::vector<std::array<int, 3>> cells)
    : level_(level), lattice_(std::move(lattice)), cells_(std::move(cells)) {
  finalize();
}

Mesh Mesh::unit_square(int level) {
  if (level < 0) throw std::invalid_argument("unit_square: negative level");
  const std::int64_t n = std::int64_t{1} << level;
  std::vector<Lattice> lattice;
  lattice.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (std::int64_t j = 0; j <= n; ++j)
    for (std::int64_t i = 0; i <= n; ++i) lattice.push_back({i, j});

  auto id = [n](std::int64_t i, std::int64_t j) { return static_cast<int>(j * (n + 1) + i); };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < n; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  return Mesh(level, std::move(lattice), std::move(cells));
}

Mesh Mesh::refined() const {
  std::vector<Lattice> lattice;
  lattice.reserve(lattice_.size() * 4);
  for (const auto& p : lattice_) lattice.push_back({2 * p[0], 2 * p[1]});

  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(lattice.size()));
    if (inserted) lattice.push_back({lattice_[a][0] + lattice_[b][0], lattice_[a][1] + lattice_[b][1]});
    return it->second;
  };

  std::vector<std::array<int, 3>> cells;
  cells.reserve(cells_.size() * 4);
  for (const auto& [a, b, c] : cells_) {
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    cells.push_back({a, ab, ca});
    cells.push_back({ab, b, bc});
    cells.push_back({ca, bc, c});
    cells.push_back({ab, bc, ca});
  }
  return Mesh(level_ + 1, std::move(lattice), std::move(cells));
}

void Mesh::finalize() {
  const std::int64_t n = std::int64_t{1} << level_;
  vertex_sides_.assign(lattice_.size(), kInterior);
  for (std::size_t i = 0; i < lattice_.size(); ++i) {
    const auto [x, y] = lattice_[i];
    std::uint8_t s = kInterior;
    if (x == 0) s |= kLeft;
    if (x == n) s |= kRight;
    if (y == 0) s |= kBottom;
    if (y == n) s |= kTop;
    vertex_sides_[i] = s;
  }

  boundary_edges_.clear();
  for (const auto& [key, count] : count_edges(cells_)) {
    if (count != 1) continue;
    const auto side = static_cast<std::uint8_t>(vertex_sides_[key.first] & vertex_sides_[key.second]);
    boundary_edges_.push_back({{key.first, key.second}, side});
  }

  h_max_ = 0.0;
  h_min_ = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_cells(); ++c) {
    const double d = diameter(c);
    h_max_ = std::max(h_max_, d);
    h_min_ = std::min(h_min_, d);
  }
}

Point Mesh::vertex(int i) const {
  const double scale = std::ldexp(1.0, -level_);
  return {static_cast<double>(lattice_[i][0]) * scale, static_cast<double>(lattice_[i][1]) * scale};
}

std::array<Point, 3> Mesh::cell_vertices(int c) const {
  const auto& v = cells_[c];
  return {vertex(v[0]), vertex(v[1]), vertex(v[2])};
}

double Mesh::signed_area(int c) const {
  const auto [a, b, p] = cell_vertices(c);
  return 0.5 * ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x());
}

double Mesh::diameter(int c) const {
  const auto [a, b, p] = cell_vertices(c);
  return std::max({(b - a).norm(), (p - b).norm(), (a - p).norm()});
}

MeshStats mesh_stats(const Mesh& mesh) {
  double area = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) area += mesh.signed_area(c);
  return {mesh.h_max(), mesh.h_min(), area, mesh.n_cells(), mesh.n_vertices()};
}

bool is_conforming(const Mesh& mesh) {
  const auto edges = count_edges(mesh.cells());
  for (const auto& [key, count] : edges) {
    if (count > 2) return false;
    if (count == 1 && (mesh.vertex_sides(key.first) & mesh.vertex_sides(key.second)) == kInterior)
      return false;
  }
  // A triangulated disk has V - E + F = 1; a hanging vertex or an overlap breaks it.
  const long euler = static_cast<long>(mesh.n_vertices()) - static_cast<long>(edges.size()) + mesh.n_cells();
  return euler == 1;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "vertices " << mesh.n_vertices() << " cells " << mesh.n_cells() << '\n';
  const auto old_precision = os.precision(17);
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    const Point p = mesh.vertex(i);
    os << p.x() << ' ' << p.y() << '\n';
  }
  for (const auto& [a, b, c] : mesh.cells()) os << a << ' ' << b << ' ' << c << '\n';
  os.precision(old_precision);
}

}  // namespace graddiv
