#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "lvpp/types.hpp"

namespace lvpp {

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Box {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  static Box unit() { return {}; }
  static Box square(double lo, double hi) { return {lo, hi, lo, hi}; }
};

/// Interior nodes of a uniform tensor grid, ordered lexicographically
/// with x running fastest. Boundary nodes are implicit (Dirichlet).
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  Box box;

  std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  Point node(int i, int j) const noexcept {
    return {box.x_min + (i + 1) * hx, box.y_min + (j + 1) * hy};
  }
  Point node(std::size_t k) const noexcept {
    return node(static_cast<int>(k % static_cast<std::size_t>(nx)), static_cast<int>(k / static_cast<std::size_t>(nx)));
  }
};

/// n x n interior points on box, so h = width / (n + 1).
Grid2D build_grid2d(int n, const Box& box);

/// Conforming triangulation; triangles are counterclockwise.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;
  std::vector<double> areas;
  Box box;
  int cells_per_axis = 0;

  std::size_t num_vertices() const noexcept { return vertices.size(); }
  std::size_t num_cells() const noexcept { return triangles.size(); }
};

/// Uniform n x n quadrilateral grid on box, each square split along the
/// diagonal from its lower-left to its upper-right corner. Vertices are
/// lexicographic with x fastest.
TriMesh build_tri_mesh(int n, const Box& box);

/// Uniform partition of [a, b] into n cells.
struct IntervalMesh {
  std::vector<double> nodes;
  std::vector<bool> boundary;
  double a = 0.0;
  double b = 1.0;

  std::size_t num_vertices() const noexcept { return nodes.size(); }
  std::size_t num_cells() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
  double spacing(std::size_t cell) const { return nodes[cell + 1] - nodes[cell]; }
};

IntervalMesh build_interval_mesh(int n, double a, double b);

}  // namespace lvpp
