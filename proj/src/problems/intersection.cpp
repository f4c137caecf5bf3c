#include <cmath>
#include <limits>
#include <stdexcept>

#include "gradient_family.hpp"

namespace lvpp {

double bump_obstacle(double x) {
  if (x <= 0.2 || x >= 0.8) return 0.0;
  // c cancels exp(-1 / (10 * 0.3 * 0.3)), the value at x = 0.5
  const double c = std::exp(1.0 / 0.9);
  return c * std::exp(-1.0 / (10.0 * (x - 0.2) * (0.8 - x)));
}

AlphaSchedule intersection_schedule() { return AlphaSchedule::capped_geometric(1.0, 2.0, 1e6); }

namespace {

struct IntersectionCore {
  std::shared_ptr<const P1Space> space;
  LegendreMap obstacle;
  LegendreMap slope;
  std::size_t nu = 0;
  std::size_t cells = 0;
  SparseMatrix k;
  SparseMatrix coupling;    // nu x cells: |c| (dphi_v/dx) on c
  SparseMatrix coupling_t;
  Vector weight;            // lumped mass on free vertices
  SparseMatrix mass;
  std::vector<Point> points;
};

}  // namespace

SaddleProblem build_intersection(const IntersectionData& data) {
  if (!(data.slope_cap > 0.0) || !(data.interior_slope > 0.0)) {
    throw std::invalid_argument("build_intersection: slope bounds must be positive");
  }
  auto space = detail::unit_space(data.n, true);
  const auto& free = space->free_nodes;
  const std::size_t nu = free.size();
  const std::size_t cells = space->num_cells();
  if (nu == 0) throw std::invalid_argument("build_intersection: mesh has no interior vertices");

  const double cap = data.slope_cap;
  const double inner = data.interior_slope;
  ScalarField radius = [cap, inner](const Point& p) { return (p.x <= 0.2 || p.x >= 0.8) ? cap : inner; };
  ScalarField lower = [](const Point& p) { return bump_obstacle(p.x); };

  auto core = std::make_shared<IntersectionCore>(IntersectionCore{
      space, LegendreMap::shannon_lower(lower), LegendreMap::hellinger(radius, 1), nu, cells,
      space->stiffness.submatrix(free, free), {}, {}, Vector(nu), space->mass.submatrix(free, free), {}});
  TripletBuilder tb(cells, nu);
  const SparseMatrix& g = space->gradient[0];
  for (std::size_t c = 0; c < cells; ++c) {
    for (int p = g.row_ptr()[c]; p < g.row_ptr()[c + 1]; ++p) {
      const int col = space->free_index[g.col_idx()[p]];
      if (col >= 0) tb.add(c, col, space->cell_measure[c] * g.values()[p]);
    }
  }
  core->coupling_t = tb.build();
  core->coupling = core->coupling_t.transpose();
  core->points.resize(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    core->points[i] = space->nodes[free[i]];
    core->weight[i] = space->lumped_mass[free[i]];
  }

  SaddleProblem p;
  p.name = "intersection";
  p.size = 2 * nu + cells;
  p.layout = {{"u", 0, nu}, {"psi0", nu, nu}, {"psi", 2 * nu, cells}};
  p.space = space;

  p.residual = [core](std::span<const double> s, double alpha, std::span<const double> prev) {
    const std::size_t nu = core->nu;
    const std::size_t nc = core->cells;
    const auto u = s.first(nu);
    Vector r(2 * nu + nc, 0.0);
    std::span<double> ru(r.data(), nu);
    core->k.multiply_add(u, ru, alpha);
    Vector dpsi(nc);
    for (std::size_t c = 0; c < nc; ++c) dpsi[c] = s[2 * nu + c] - prev[2 * nu + c];
    core->coupling.multiply_add(dpsi, ru);
    for (std::size_t i = 0; i < nu; ++i) {
      ru[i] += core->weight[i] * (s[nu + i] - prev[nu + i]);
      r[nu + i] = core->weight[i] * (u[i] - inverse_gradient(core->obstacle, core->points[i], s[nu + i]));
    }
    std::span<double> rc(r.data() + 2 * nu, nc);
    core->coupling_t.multiply_add(u, rc);
    for (std::size_t c = 0; c < nc; ++c) {
      rc[c] -= core->space->cell_measure[c] * inverse_gradient(core->slope, core->space->centroids[c], s[2 * nu + c]);
    }
    return r;
  };

  p.jacobian = [core](std::span<const double> s, double alpha, std::span<const double>) {
    const std::size_t nu = core->nu;
    const std::size_t nc = core->cells;
    TripletBuilder tb(2 * nu + nc, 2 * nu + nc);
    tb.reserve(core->k.nnz() + 2 * core->coupling.nnz() + 3 * nu + nc);
    tb.add_block(core->k, 0, 0, alpha);
    tb.add_block(core->coupling, 0, 2 * nu);
    tb.add_block(core->coupling_t, 2 * nu, 0);
    for (std::size_t i = 0; i < nu; ++i) {
      const double w = core->weight[i];
      tb.add(i, nu + i, w);
      tb.add(nu + i, i, w);
      tb.add(nu + i, nu + i, -w * inverse_gradient_derivative(core->obstacle, core->points[i], s[nu + i]));
    }
    for (std::size_t c = 0; c < nc; ++c) {
      tb.add(2 * nu + c, 2 * nu + c,
             -core->space->cell_measure[c] *
                 inverse_gradient_derivative(core->slope, core->space->centroids[c], s[2 * nu + c]));
    }
    return tb.build();
  };

  p.step_limit = detail::hellinger_step_limit(2 * nu, cells, 1);

  p.primal = [core](std::span<const double> s) { return core->space->extend(s.first(core->nu)); };
  // phi0 + exp(psi0) on the free vertices, the obstacle itself (zero) on the boundary.
  p.latent_recovery = [core](std::span<const double> s) {
    Vector out(core->space->num_nodes(), 0.0);
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = bump_obstacle(core->space->nodes[v].x);
    for (std::size_t i = 0; i < core->nu; ++i) {
      out[core->space->free_nodes[i]] = inverse_gradient(core->obstacle, core->points[i], s[core->nu + i]);
    }
    return out;
  };
  p.extras["slopes"] = [core](std::span<const double> s) {
    Vector out(core->cells);
    for (std::size_t c = 0; c < core->cells; ++c) {
      out[c] = inverse_gradient(core->slope, core->space->centroids[c], s[2 * core->nu + c]);
    }
    return out;
  };
  p.increment_norm = [core](std::span<const double> s, std::span<const double> prev) {
    Vector d(core->nu);
    for (std::size_t i = 0; i < core->nu; ++i) d[i] = s[i] - prev[i];
    return std::sqrt(std::max(0.0, core->mass.quadratic_form(d)));
  };
  p.feasibility_margin = [core](std::span<const double> s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < core->nu; ++i) {
      m = std::min(m, core->obstacle.feasibility_margin(core->points[i], s.subspan(core->nu + i, 1)));
    }
    for (std::size_t c = 0; c < core->cells; ++c) {
      m = std::min(m, core->slope.feasibility_margin(core->space->centroids[c], s.subspan(2 * core->nu + c, 1)));
    }
    return m;
  };
  return p;
}

}  // namespace lvpp
