#include "lvpp/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lvpp/error.hpp"

namespace lvpp {

namespace {

struct TriangleGeometry {
  double area;
  std::array<double, 3> gx;  // gradients of the barycentric coordinates
  std::array<double, 3> gy;
};

TriangleGeometry triangle_geometry(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Point& a = mesh.vertices.at(tri[0]);
  const Point& b = mesh.vertices.at(tri[1]);
  const Point& c = mesh.vertices.at(tri[2]);
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const auto sq = [](double dx, double dy) { return dx * dx + dy * dy; };
  const double scale = std::max({sq(b.x - a.x, b.y - a.y), sq(c.x - b.x, c.y - b.y), sq(a.x - c.x, a.y - c.y)});
  if (!(det > 1e-14 * scale)) {
    throw AssemblyError("degenerate or clockwise triangle " + std::to_string(t));
  }
  TriangleGeometry g;
  g.area = 0.5 * det;
  g.gx = {(b.y - c.y) / det, (c.y - a.y) / det, (a.y - b.y) / det};
  g.gy = {(c.x - b.x) / det, (a.x - c.x) / det, (b.x - a.x) / det};
  return g;
}

void check_interval(const IntervalMesh& mesh, std::size_t c) {
  if (!(mesh.spacing(c) > 0.0)) throw AssemblyError("degenerate interval cell " + std::to_string(c));
}

}  // namespace

SparseMatrix fd_laplacian(const Grid2D& grid) {
  if (grid.nx < 1 || grid.ny < 1 || !(grid.hx > 0.0) || !(grid.hy > 0.0)) {
    throw std::invalid_argument("fd_laplacian: invalid grid");
  }
  const double cx = 1.0 / (grid.hx * grid.hx);
  const double cy = 1.0 / (grid.hy * grid.hy);
  TripletBuilder t(grid.size(), grid.size());
  t.reserve(5 * grid.size());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const auto row = grid.index(i, j);
      t.add(row, row, 2.0 * cx + 2.0 * cy);
      if (i > 0) t.add(row, grid.index(i - 1, j), -cx);
      if (i + 1 < grid.nx) t.add(row, grid.index(i + 1, j), -cx);
      if (j > 0) t.add(row, grid.index(i, j - 1), -cy);
      if (j + 1 < grid.ny) t.add(row, grid.index(i, j + 1), -cy);
    }
  }
  return t.build();
}

SparseMatrix assemble_p1_stiffness(const TriMesh& mesh) {
  const auto n = mesh.num_vertices();
  TripletBuilder t(n, n);
  t.reserve(9 * mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto g = triangle_geometry(mesh, c);
    const auto& tri = mesh.triangles[c];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        t.add(tri[a], tri[b], g.area * (g.gx[a] * g.gx[b] + g.gy[a] * g.gy[b]));
      }
    }
  }
  return t.build();
}

SparseMatrix assemble_p1_stiffness(const IntervalMesh& mesh) {
  const auto n = mesh.num_vertices();
  TripletBuilder t(n, n);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    check_interval(mesh, c);
    const double k = 1.0 / mesh.spacing(c);
    t.add(c, c, k);
    t.add(c + 1, c + 1, k);
    t.add(c, c + 1, -k);
    t.add(c + 1, c, -k);
  }
  return t.build();
}

SparseMatrix assemble_p1_mass(const TriMesh& mesh, bool lumped) {
  const auto n = mesh.num_vertices();
  if (lumped) {
    Vector d(n, 0.0);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const double area = triangle_geometry(mesh, c).area;
      for (int v : mesh.triangles[c]) d[v] += area / 3.0;
    }
    return SparseMatrix::diagonal(d);
  }
  TripletBuilder t(n, n);
  t.reserve(9 * mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double area = triangle_geometry(mesh, c).area;
    const auto& tri = mesh.triangles[c];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) t.add(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
    }
  }
  return t.build();
}

SparseMatrix assemble_p1_mass(const IntervalMesh& mesh, bool lumped) {
  const auto n = mesh.num_vertices();
  TripletBuilder t(n, n);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    check_interval(mesh, c);
    const double h = mesh.spacing(c);
    if (lumped) {
      t.add(c, c, h / 2.0);
      t.add(c + 1, c + 1, h / 2.0);
    } else {
      t.add(c, c, h / 3.0);
      t.add(c + 1, c + 1, h / 3.0);
      t.add(c, c + 1, h / 6.0);
      t.add(c + 1, c, h / 6.0);
    }
  }
  return t.build();
}

std::pair<SparseMatrix, SparseMatrix> p1_cell_gradient_operator(const TriMesh& mesh) {
  TripletBuilder gx(mesh.num_cells(), mesh.num_vertices());
  TripletBuilder gy(mesh.num_cells(), mesh.num_vertices());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto g = triangle_geometry(mesh, c);
    const auto& tri = mesh.triangles[c];
    for (int a = 0; a < 3; ++a) {
      gx.add(c, tri[a], g.gx[a]);
      gy.add(c, tri[a], g.gy[a]);
    }
  }
  return {gx.build(), gy.build()};
}

SparseMatrix p1_cell_derivative_operator(const IntervalMesh& mesh) {
  TripletBuilder d(mesh.num_cells(), mesh.num_vertices());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    check_interval(mesh, c);
    const double h = mesh.spacing(c);
    d.add(c, c, -1.0 / h);
    d.add(c, c + 1, 1.0 / h);
  }
  return d.build();
}

Vector assemble_load(const TriMesh& mesh, const ScalarField& f) {
  Vector fv(mesh.num_vertices());
  for (std::size_t v = 0; v < fv.size(); ++v) fv[v] = f(mesh.vertices[v]);
  Vector load(mesh.num_vertices(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double area = triangle_geometry(mesh, c).area;
    for (int v : mesh.triangles[c]) load[v] += area / 3.0 * fv[v];
  }
  return load;
}

Vector assemble_load(const IntervalMesh& mesh, const ScalarField& f) {
  Vector load(mesh.num_vertices(), 0.0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    check_interval(mesh, c);
    const double h = mesh.spacing(c);
    load[c] += h / 2.0 * f({mesh.nodes[c], 0.0});
    load[c + 1] += h / 2.0 * f({mesh.nodes[c + 1], 0.0});
  }
  return load;
}

Vector P1Space::extend(std::span<const double> free_values) const {
  if (free_values.size() != free_nodes.size()) throw std::invalid_argument("P1Space::extend: size mismatch");
  Vector full(nodes.size(), 0.0);
  for (std::size_t i = 0; i < free_nodes.size(); ++i) full[free_nodes[i]] = free_values[i];
  return full;
}

namespace {

void index_free_nodes(P1Space& s) {
  s.free_index.assign(s.nodes.size(), -1);
  for (std::size_t v = 0; v < s.nodes.size(); ++v) {
    if (!s.boundary[v]) {
      s.free_index[v] = static_cast<int>(s.free_nodes.size());
      s.free_nodes.push_back(static_cast<int>(v));
    }
  }
}

}  // namespace

P1Space make_p1_space(const TriMesh& mesh) {
  P1Space s;
  s.dim = 2;
  s.mesh = mesh;
  s.nodes = mesh.vertices;
  s.boundary = mesh.boundary;
  index_free_nodes(s);
  s.cell_measure.reserve(mesh.num_cells());
  s.centroids.reserve(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    s.cell_measure.push_back(triangle_geometry(mesh, c).area);
    const auto& t = mesh.triangles[c];
    const Point& a = mesh.vertices[t[0]];
    const Point& b = mesh.vertices[t[1]];
    const Point& d = mesh.vertices[t[2]];
    s.centroids.push_back({(a.x + b.x + d.x) / 3.0, (a.y + b.y + d.y) / 3.0});
  }
  s.stiffness = assemble_p1_stiffness(mesh);
  s.mass = assemble_p1_mass(mesh, false);
  s.lumped_mass = assemble_p1_mass(mesh, true).diagonal();
  auto [gx, gy] = p1_cell_gradient_operator(mesh);
  s.gradient = {std::move(gx), std::move(gy)};
  return s;
}

P1Space make_p1_space(const IntervalMesh& mesh) {
  P1Space s;
  s.dim = 1;
  s.mesh = mesh;
  s.nodes.reserve(mesh.num_vertices());
  for (double x : mesh.nodes) s.nodes.push_back({x, 0.0});
  s.boundary = mesh.boundary;
  index_free_nodes(s);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    s.cell_measure.push_back(mesh.spacing(c));
    s.centroids.push_back({0.5 * (mesh.nodes[c] + mesh.nodes[c + 1]), 0.0});
  }
  s.stiffness = assemble_p1_stiffness(mesh);
  s.mass = assemble_p1_mass(mesh, false);
  s.lumped_mass = assemble_p1_mass(mesh, true).diagonal();
  s.gradient = {p1_cell_derivative_operator(mesh)};
  return s;
}

}  // namespace lvpp
