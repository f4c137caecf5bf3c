#include "lvpp/io.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <variant>

namespace lvpp {

namespace {

void check_fields(const std::vector<FieldData>& fields, std::size_t nodes, std::size_t cells) {
  for (const auto& f : fields) {
    if (f.components < 1 || f.components > 4) throw std::invalid_argument("vtk: field '" + f.name + "' has bad width");
    const std::size_t expect = (f.location == FieldLocation::Node ? nodes : cells) * static_cast<std::size_t>(f.components);
    if (f.values.size() != expect) throw std::invalid_argument("vtk: field '" + f.name + "' has the wrong length");
  }
}

void write_data(std::ostream& out, const std::vector<FieldData>& fields, FieldLocation where, std::size_t count) {
  bool header = false;
  for (const auto& f : fields) {
    if (f.location != where) continue;
    if (!header) {
      out << (where == FieldLocation::Node ? "POINT_DATA " : "CELL_DATA ") << count << '\n';
      header = true;
    }
    out << "SCALARS " << f.name << " double " << f.components << "\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < count; ++i) {
      for (int c = 0; c < f.components; ++c) {
        if (c > 0) out << ' ';
        out << format_double(f.values[i * f.components + c]);
      }
      out << '\n';
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_node_csv(std::ostream& out, std::span<const Point> nodes, std::span<const double> values) {
  if (nodes.size() != values.size()) throw std::invalid_argument("write_node_csv: field length does not match nodes");
  out << "x,y,value\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out << format_double(nodes[i].x) << ',' << format_double(nodes[i].y) << ',' << format_double(values[i]) << '\n';
  }
}

void write_cell_csv(std::ostream& out, std::span<const double> values, int components) {
  if (components < 1 || values.size() % static_cast<std::size_t>(components) != 0) {
    throw std::invalid_argument("write_cell_csv: field length is not a multiple of the width");
  }
  out << "cell";
  if (components == 1) {
    out << ",value";
  } else {
    for (int c = 0; c < components; ++c) out << ",value_" << c;
  }
  out << '\n';
  const std::size_t cells = values.size() / static_cast<std::size_t>(components);
  for (std::size_t i = 0; i < cells; ++i) {
    out << i;
    for (int c = 0; c < components; ++c) out << ',' << format_double(values[i * components + c]);
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const LvppTrace& trace) {
  out << "k,alpha,newton_iters,linear_solves,increment_norm,min_margin\n";
  for (const auto& it : trace.iterations) {
    out << it.k << ',' << format_double(it.alpha) << ',' << it.newton_iterations << ',' << it.linear_solves << ','
        << format_double(it.increment_norm) << ',' << format_double(it.min_margin) << '\n';
  }
}

std::vector<Point> grid_nodes(const Grid2D& grid) {
  std::vector<Point> nodes(grid.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = grid.node(k);
  return nodes;
}

void write_vtk(std::ostream& out, const Grid2D& grid, const std::vector<FieldData>& fields, const std::string& title) {
  check_fields(fields, grid.size(), 0);
  for (const auto& f : fields) {
    if (f.location == FieldLocation::Cell) throw std::invalid_argument("vtk: FD grids carry node fields only");
  }
  const Point o = grid.node(0, 0);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << grid.nx << ' ' << grid.ny << " 1\n";
  out << "ORIGIN " << format_double(o.x) << ' ' << format_double(o.y) << " 0\n";
  out << "SPACING " << format_double(grid.hx) << ' ' << format_double(grid.hy) << " 1\n";
  write_data(out, fields, FieldLocation::Node, grid.size());
}

void write_vtk(std::ostream& out, const P1Space& space, const std::vector<FieldData>& fields,
               const std::string& title) {
  const std::size_t nn = space.num_nodes(), nc = space.num_cells();
  check_fields(fields, nn, nc);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nn << " double\n";
  for (const auto& p : space.nodes) out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  if (const auto* tri = std::get_if<TriMesh>(&space.mesh)) {
    out << "CELLS " << nc << ' ' << 4 * nc << '\n';
    for (const auto& t : tri->triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << nc << '\n';
    for (std::size_t c = 0; c < nc; ++c) out << "5\n";
  } else {
    out << "CELLS " << nc << ' ' << 3 * nc << '\n';
    for (std::size_t c = 0; c < nc; ++c) out << "2 " << c << ' ' << c + 1 << '\n';
    out << "CELL_TYPES " << nc << '\n';
    for (std::size_t c = 0; c < nc; ++c) out << "3\n";
  }
  write_data(out, fields, FieldLocation::Node, nn);
  write_data(out, fields, FieldLocation::Cell, nc);
}

}  // namespace lvpp
