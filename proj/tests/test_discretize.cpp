#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "lvpp/assembly.hpp"
#include "lvpp/error.hpp"
#include "lvpp/mesh.hpp"
#include "lvpp/solvers.hpp"
#include "lvpp/sparse.hpp"

using namespace lvpp;
using doctest::Approx;
using std::numbers::pi;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) d(i, a.col_idx()[p]) = a.values()[p];
  }
  return d;
}

double total(const SparseMatrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return s;
}

double manufactured(const Point& p) { return std::sin(pi * p.x) * std::sin(pi * p.y); }

// Max-norm error of the 5-point solution of -Lap u = 2 pi^2 sin sin on (0,1)^2.
double fd_poisson_error(int n) {
  const Grid2D g = build_grid2d(n, Box::unit());
  Vector f(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) f[k] = 2.0 * pi * pi * manufactured(g.node(k));
  const Vector u = solve_sparse(fd_laplacian(g), f);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(u[k] - manufactured(g.node(k))));
  return err;
}

// Discrete L2 error of the P1 solution against the nodal interpolant.
double p1_poisson_error(int n) {
  const P1Space s = make_p1_space(build_tri_mesh(n, Box::unit()));
  const auto& mesh = std::get<TriMesh>(s.mesh);
  const Vector load = assemble_load(mesh, [](const Point& p) { return 2.0 * pi * pi * manufactured(p); });
  Vector rhs(s.num_free());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = load[s.free_nodes[k]];
  const SparseMatrix k_free = s.stiffness.submatrix(s.free_nodes, s.free_nodes);
  const Vector u = s.extend(solve_sparse(k_free, rhs));
  Vector e(s.num_nodes());
  for (std::size_t v = 0; v < e.size(); ++v) e[v] = u[v] - manufactured(s.nodes[v]);
  const Vector me = s.mass.multiply(e);
  double q = 0.0;
  for (std::size_t v = 0; v < e.size(); ++v) q += e[v] * me[v];
  return std::sqrt(q);
}

}  // namespace

TEST_SUITE("discretize") {
  TEST_CASE("meshes") {
    const TriMesh m = build_tri_mesh(1, Box::unit());
    CHECK(m.num_vertices() == 4);
    CHECK(m.num_cells() == 2);
    for (bool b : m.boundary) CHECK(b);
    const Grid2D g = build_grid2d(3, Box::unit());
    CHECK(g.hx == 0.25);
    CHECK(g.hy == 0.25);
    const IntervalMesh im = build_interval_mesh(4, 0.0, 1.0);
    CHECK(im.num_vertices() == 5);
    CHECK(im.spacing(2) == Approx(0.25));
    CHECK_THROWS_AS(build_tri_mesh(0, Box::unit()), std::invalid_argument);
    CHECK_THROWS_AS(build_grid2d(0, Box::unit()), std::invalid_argument);
    CHECK_THROWS_AS(build_interval_mesh(0, 0.0, 1.0), std::invalid_argument);

    const TriMesh fine = build_tri_mesh(4, Box::square(-1.0, 1.0));
    for (std::size_t v = 0; v < fine.num_vertices(); ++v) {
      const Point p = fine.vertices[v];
      const bool on_edge = std::abs(std::abs(p.x) - 1.0) < 1e-15 || std::abs(std::abs(p.y) - 1.0) < 1e-15;
      CHECK(fine.boundary[v] == on_edge);
    }
    for (double a : fine.areas) CHECK(a == Approx(0.125));
  }

  TEST_CASE("FD Laplacian") {
    const SparseMatrix one = fd_laplacian(build_grid2d(1, Box::unit()));
    CHECK(one.rows() == 1);
    CHECK(one.at(0, 0) == 16.0);

    const SparseMatrix a = fd_laplacian(build_grid2d(2, Box::unit()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(a));
    CHECK(es.eigenvalues().minCoeff() == Approx(18.0).epsilon(1e-12));
    CHECK(asymmetry(fd_laplacian(build_grid2d(7, Box::square(-1.0, 1.0)))) == 0.0);
  }

  TEST_CASE("P1 stiffness on two triangles") {
    const SparseMatrix k = assemble_p1_stiffness(build_tri_mesh(1, Box::unit()));
    // Vertices (0,0), (1,0), (0,1), (1,1); the diagonal runs from 0 to 3.
    for (int i = 0; i < 4; ++i) CHECK(k.at(i, i) == Approx(1.0));
    CHECK(k.at(0, 1) == Approx(-0.5));
    CHECK(k.at(0, 2) == Approx(-0.5));
    CHECK(k.at(1, 3) == Approx(-0.5));
    CHECK(k.at(2, 3) == Approx(-0.5));
    CHECK(k.at(0, 3) == Approx(0.0));
    CHECK(k.at(1, 2) == 0.0);
  }

  TEST_CASE("P1 stiffness properties") {
    const TriMesh m = build_tri_mesh(6, Box::unit());
    const SparseMatrix k = assemble_p1_stiffness(m);
    CHECK(asymmetry(k) < 1e-15);
    for (double r : k.row_sums()) CHECK(std::abs(r) < 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(k));
    CHECK(es.eigenvalues().minCoeff() > -1e-12);

    // Scaling the coordinates leaves the 2D stiffness unchanged.
    const SparseMatrix ks = assemble_p1_stiffness(build_tri_mesh(6, Box{0.0, 3.0, 0.0, 3.0}));
    CHECK((dense(k) - dense(ks)).cwiseAbs().maxCoeff() < 1e-13);

    TriMesh bad = build_tri_mesh(1, Box::unit());
    std::swap(bad.triangles[1][1], bad.triangles[1][2]);
    CHECK_THROWS_AS(assemble_p1_stiffness(bad), AssemblyError);
  }

  TEST_CASE("P1 mass") {
    const TriMesh m = build_tri_mesh(5, Box::unit());
    const SparseMatrix mc = assemble_p1_mass(m, false);
    const SparseMatrix ml = assemble_p1_mass(m, true);
    CHECK(total(mc) == Approx(1.0).epsilon(1e-14));
    CHECK(total(ml) == Approx(1.0).epsilon(1e-14));
    const Vector rows = mc.row_sums();
    const Vector diag = ml.diagonal();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(diag[i] > 0.0);
      CHECK(diag[i] == Approx(rows[i]).epsilon(1e-14));
    }
    const SparseMatrix two = assemble_p1_mass(build_tri_mesh(1, Box::unit()), false);
    CHECK(two.at(1, 1) == Approx(2.0 * 0.5 / 12.0));
    CHECK(two.at(0, 0) == Approx(2.0 * 2.0 * 0.5 / 12.0));
  }

  TEST_CASE("cell gradients") {
    const TriMesh m = build_tri_mesh(4, Box{0.0, 2.0, -1.0, 1.0});
    const auto [gx, gy] = p1_cell_gradient_operator(m);
    Vector ux(m.num_vertices()), uy(m.num_vertices()), uc(m.num_vertices(), 3.0);
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      ux[v] = m.vertices[v].x;
      uy[v] = m.vertices[v].y;
    }
    for (double v : gx.multiply(ux)) CHECK(v == Approx(1.0));
    for (double v : gy.multiply(ux)) CHECK(std::abs(v) < 1e-14);
    for (double v : gy.multiply(uy)) CHECK(v == Approx(1.0));
    for (double v : gx.multiply(uc)) CHECK(std::abs(v) < 1e-13);
    for (double v : gy.multiply(uc)) CHECK(std::abs(v) < 1e-13);

    // Against the gradient of the linear interpolant on each triangle.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector u(m.num_vertices());
    for (double& t : u) t = dist(rng);
    const Vector cx = gx.multiply(u), cy = gy.multiply(u);
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const auto& t = m.triangles[c];
      const Point a = m.vertices[t[0]], b = m.vertices[t[1]], d = m.vertices[t[2]];
      Eigen::Matrix2d e;
      e << b.x - a.x, b.y - a.y, d.x - a.x, d.y - a.y;
      const Eigen::Vector2d g = e.inverse() * Eigen::Vector2d(u[t[1]] - u[t[0]], u[t[2]] - u[t[0]]);
      CHECK(std::abs(cx[c] - g[0]) < 1e-13);
      CHECK(std::abs(cy[c] - g[1]) < 1e-13);
    }

    const IntervalMesh im = build_interval_mesh(5, 0.0, 2.0);
    Vector ui(im.num_vertices());
    for (std::size_t v = 0; v < ui.size(); ++v) ui[v] = 3.0 * im.nodes[v];
    for (double v : p1_cell_derivative_operator(im).multiply(ui)) CHECK(v == Approx(3.0));
  }

  TEST_CASE("load vector") {
    const TriMesh m = build_tri_mesh(1, Box::unit());
    const Vector one = assemble_load(m, constant_field(1.0));
    CHECK(one[0] == Approx(1.0 / 3.0));
    CHECK(one[3] == Approx(1.0 / 3.0));
    CHECK(one[1] == Approx(1.0 / 6.0));
    CHECK(one[2] == Approx(1.0 / 6.0));
    const Vector big = assemble_load(build_tri_mesh(7, Box{0.0, 2.0, 0.0, 1.5}), constant_field(1.0));
    double s = 0.0;
    for (double v : big) s += v;
    CHECK(s == Approx(3.0).epsilon(1e-14));
    for (double v : assemble_load(m, constant_field(0.0))) CHECK(v == 0.0);
  }

  TEST_CASE("FD Poisson is second order") {
    const double e1 = fd_poisson_error(7), e2 = fd_poisson_error(15), e3 = fd_poisson_error(31), e4 = fd_poisson_error(63);
    for (double r : {e1 / e2, e2 / e3, e3 / e4}) {
      CHECK(r >= 3.5);
      CHECK(r <= 4.5);
    }
  }

  TEST_CASE("P1 Poisson is second order in L2") {
    const double e1 = p1_poisson_error(8), e2 = p1_poisson_error(16), e3 = p1_poisson_error(32);
    for (double r : {e1 / e2, e2 / e3}) {
      CHECK(r >= 3.5);
      CHECK(r <= 4.5);
    }
  }

  TEST_CASE("sparse matrix basics") {
    TripletBuilder t(2, 3);
    t.add(0, 2, 1.0);
    t.add(0, 2, 2.0);
    t.add(1, 0, -1.0);
    const SparseMatrix a = t.build();
    CHECK(a.nnz() == 2);
    CHECK(a.at(0, 2) == 3.0);
    CHECK(a.at(0, 0) == 0.0);
    const Vector y = a.multiply(Vector{1.0, 2.0, 3.0});
    CHECK(y[0] == 9.0);
    CHECK(y[1] == -1.0);
    const SparseMatrix at = a.transpose();
    CHECK(at.rows() == 3);
    CHECK(at.at(2, 0) == 3.0);
    CHECK(a.multiply(at).at(0, 0) == 9.0);
    CHECK(add(a, a, 1.0, -1.0).at(0, 2) == 0.0);
  }
}
