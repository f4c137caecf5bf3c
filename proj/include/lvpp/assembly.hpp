#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "lvpp/mesh.hpp"
#include "lvpp/sparse.hpp"

namespace lvpp {

/// Five-point matrix of -Laplace on the interior nodes of grid with
/// homogeneous Dirichlet data eliminated.
SparseMatrix fd_laplacian(const Grid2D& grid);

// P1 finite elements. All operators act on the full vertex set; Dirichlet
// rows/columns are removed by the caller (see P1Space::free_nodes).

SparseMatrix assemble_p1_stiffness(const TriMesh& mesh);
SparseMatrix assemble_p1_stiffness(const IntervalMesh& mesh);

/// Consistent mass, or its row-sum lumped diagonal.
SparseMatrix assemble_p1_mass(const TriMesh& mesh, bool lumped);
SparseMatrix assemble_p1_mass(const IntervalMesh& mesh, bool lumped);

/// Maps nodal values to the constant gradient on each triangle: (Gx, Gy),
/// each num_cells x num_vertices.
std::pair<SparseMatrix, SparseMatrix> p1_cell_gradient_operator(const TriMesh& mesh);
/// Cellwise derivative on an interval mesh, num_cells x num_vertices.
SparseMatrix p1_cell_derivative_operator(const IntervalMesh& mesh);

/// Load vector by vertex quadrature: f at the vertices, weight measure/3
/// (triangles) or measure/2 (intervals) per incident cell.
Vector assemble_load(const TriMesh& mesh, const ScalarField& f);
Vector assemble_load(const IntervalMesh& mesh, const ScalarField& f);

/// Everything a P1 / DG0 problem needs from its mesh, assembled once.
struct P1Space {
  int dim = 2;
  std::variant<TriMesh, IntervalMesh> mesh;
  std::vector<Point> nodes;
  std::vector<bool> boundary;
  std::vector<int> free_nodes;  ///< vertex ids of non-Dirichlet nodes
  std::vector<int> free_index;  ///< vertex id -> position in free_nodes, or -1
  std::vector<Point> centroids;
  Vector cell_measure;
  SparseMatrix stiffness;
  SparseMatrix mass;
  Vector lumped_mass;
  std::vector<SparseMatrix> gradient;  ///< one cells x vertices operator per component

  std::size_t num_nodes() const noexcept { return nodes.size(); }
  std::size_t num_cells() const noexcept { return cell_measure.size(); }
  std::size_t num_free() const noexcept { return free_nodes.size(); }

  /// Scatters free-node values into a full nodal vector with zero Dirichlet data.
  Vector extend(std::span<const double> free_values) const;
};

P1Space make_p1_space(const TriMesh& mesh);
P1Space make_p1_space(const IntervalMesh& mesh);

}  // namespace lvpp
