#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lvpp/assembly.hpp"
#include "lvpp/lvpp.hpp"
#include "lvpp/mesh.hpp"

namespace lvpp {

/// Shortest text for v that is at most 17 significant digits ("%.17g").
std::string format_double(double v);

enum class FieldLocation { Node, Cell };

struct FieldData {
  std::string name;
  FieldLocation location = FieldLocation::Node;
  int components = 1;
  Vector values;  ///< component-interleaved for vector fields
};

/// Header "x,y,value", one row per node in the given order.
void write_node_csv(std::ostream& out, std::span<const Point> nodes, std::span<const double> values);

/// Header "cell,value" (or "cell,value_0,value_1,..." for vector fields).
void write_cell_csv(std::ostream& out, std::span<const double> values, int components = 1);

/// Header "k,alpha,newton_iters,linear_solves,increment_norm,min_margin".
void write_trace_csv(std::ostream& out, const LvppTrace& trace);

/// Legacy ASCII VTK. FD grids become STRUCTURED_POINTS over the interior
/// nodes; P1 spaces become UNSTRUCTURED_GRID with triangle (or line) cells.
void write_vtk(std::ostream& out, const Grid2D& grid, const std::vector<FieldData>& fields,
               const std::string& title = "lvpp");
void write_vtk(std::ostream& out, const P1Space& space, const std::vector<FieldData>& fields,
               const std::string& title = "lvpp");

/// Node coordinates of an FD grid in storage order.
std::vector<Point> grid_nodes(const Grid2D& grid);

}  // namespace lvpp
