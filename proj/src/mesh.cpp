#include "lvpp/mesh.hpp"

#include <stdexcept>

namespace lvpp {

namespace {

void check_box(const Box& box) {
  if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) {
    throw std::invalid_argument("box must have positive extent");
  }
}

}  // namespace

Grid2D build_grid2d(int n, const Box& box) {
  if (n < 1) throw std::invalid_argument("build_grid2d: need at least one interior point per axis");
  check_box(box);
  Grid2D g;
  g.nx = n;
  g.ny = n;
  g.box = box;
  g.hx = (box.x_max - box.x_min) / (n + 1);
  g.hy = (box.y_max - box.y_min) / (n + 1);
  return g;
}

TriMesh build_tri_mesh(int n, const Box& box) {
  if (n < 1) throw std::invalid_argument("build_tri_mesh: need at least one cell per axis");
  check_box(box);
  TriMesh m;
  m.box = box;
  m.cells_per_axis = n;
  const double hx = (box.x_max - box.x_min) / n;
  const double hy = (box.y_max - box.y_min) / n;
  const auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  m.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  m.boundary.reserve(m.vertices.capacity());
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // Snap the last row/column exactly onto the box edge.
      const double x = i == n ? box.x_max : box.x_min + i * hx;
      const double y = j == n ? box.y_max : box.y_min + j * hy;
      m.vertices.push_back({x, y});
      m.boundary.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }
  m.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }
  m.areas.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Point& a = m.vertices[t[0]];
    const Point& b = m.vertices[t[1]];
    const Point& c = m.vertices[t[2]];
    m.areas.push_back(0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)));
  }
  return m;
}

IntervalMesh build_interval_mesh(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("build_interval_mesh: need at least one cell");
  if (!(b > a)) throw std::invalid_argument("build_interval_mesh: empty interval");
  IntervalMesh m;
  m.a = a;
  m.b = b;
  const double h = (b - a) / n;
  m.nodes.reserve(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) m.nodes.push_back(i == n ? b : a + i * h);
  m.boundary.assign(m.nodes.size(), false);
  m.boundary.front() = true;
  m.boundary.back() = true;
  return m;
}

}  // namespace lvpp
