#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gradient_family.hpp"

namespace lvpp {

namespace detail {

std::shared_ptr<const P1Space> unit_space(int n, bool interval) {
  if (interval) return std::make_shared<P1Space>(make_p1_space(build_interval_mesh(n, 0.0, 1.0)));
  return std::make_shared<P1Space>(make_p1_space(build_tri_mesh(n, Box::unit())));
}

std::function<double(std::span<const double>, std::span<const double>)> hellinger_step_limit(std::size_t offset,
                                                                                           std::size_t cells,
                                                                                           int dim) {
  constexpr double growth = 2.0;
  return [=](std::span<const double> s, std::span<const double> step) {
    double limit = 1.0;
    for (std::size_t c = 0; c < cells; ++c) {
      double ds = 0.0, ps = 0.0;
      for (int d = 0; d < dim; ++d) {
        const std::size_t i = offset + c * dim + d;
        ds += step[i] * step[i];
        ps += s[i] * s[i];
      }
      const double cap = growth * (1.0 + std::sqrt(ps));
      if (std::sqrt(ds) * limit > cap) limit = cap / std::sqrt(ds);
    }
    return limit;
  };
}

namespace {

struct GradientCore {
  std::shared_ptr<const P1Space> space;
  LegendreMap map;
  std::size_t nu = 0;     // free vertices
  std::size_t cells = 0;
  int dim = 2;
  SparseMatrix k;         // free block of the stiffness, times the weight
  Vector load;            // free part of (f, v)
  SparseMatrix coupling;  // nu x (cells * dim): columns are |c| (grad phi_v)_d
  SparseMatrix coupling_t;
  SparseMatrix mass;      // free block of the consistent mass
};

}  // namespace

SaddleProblem build_gradient_family(std::shared_ptr<const P1Space> space, const ScalarField& force,
                                    const ScalarField& radius, double stiffness_weight, std::string name) {
  const auto& free = space->free_nodes;
  const std::size_t nu = free.size();
  const std::size_t cells = space->num_cells();
  const int dim = space->dim;
  if (nu == 0) throw std::invalid_argument(name + ": mesh has no interior vertices");

  for (const auto& p : space->centroids) {
    if (!(radius(p) > 0.0)) throw std::invalid_argument(name + ": the gradient bound must be positive");
  }
  for (const auto& p : space->nodes) {
    if (!(radius(p) > 0.0)) throw std::invalid_argument(name + ": the gradient bound must be positive");
  }

  auto core = std::make_shared<GradientCore>(GradientCore{space, LegendreMap::hellinger(radius, dim), nu, cells,
                                                          dim, {}, {}, {}, {}, {}});
  core->k = space->stiffness.submatrix(free, free).scaled(stiffness_weight);
  const Vector load = std::visit([&](const auto& m) { return assemble_load(m, force); }, space->mesh);
  core->load.resize(nu);
  for (std::size_t i = 0; i < nu; ++i) core->load[i] = load[free[i]];
  core->mass = space->mass.submatrix(free, free);

  // Row (c, d) of the constraint block is |c| (G_d u)_c.
  TripletBuilder tb(cells * dim, nu);
  for (int d = 0; d < dim; ++d) {
    const SparseMatrix& g = space->gradient[d];
    for (std::size_t c = 0; c < cells; ++c) {
      for (int p = g.row_ptr()[c]; p < g.row_ptr()[c + 1]; ++p) {
        const int col = space->free_index[g.col_idx()[p]];
        if (col >= 0) tb.add(c * dim + d, col, space->cell_measure[c] * g.values()[p]);
      }
    }
  }
  core->coupling_t = tb.build();
  core->coupling = core->coupling_t.transpose();

  const std::size_t nl = cells * dim;
  SaddleProblem p;
  p.name = std::move(name);
  p.size = nu + nl;
  p.layout = {{"u", 0, nu}, {"psi", nu, nl}};
  p.space = space;

  p.residual = [core](std::span<const double> s, double alpha, std::span<const double> prev) {
    const std::size_t nu = core->nu;
    const std::size_t nl = core->cells * core->dim;
    const auto u = s.first(nu);
    const auto psi = s.subspan(nu, nl);
    Vector r(nu + nl, 0.0);
    std::span<double> ru(r.data(), nu);
    std::span<double> rl(r.data() + nu, nl);
    core->k.multiply_add(u, ru, alpha);
    Vector dpsi(nl);
    for (std::size_t i = 0; i < nl; ++i) dpsi[i] = psi[i] - prev[nu + i];
    core->coupling.multiply_add(dpsi, ru);
    for (std::size_t i = 0; i < nu; ++i) ru[i] -= alpha * core->load[i];

    core->coupling_t.multiply_add(u, rl);
    double lat[2];
    for (std::size_t c = 0; c < core->cells; ++c) {
      const auto pc = psi.subspan(c * core->dim, core->dim);
      core->map.inverse_gradient(core->space->centroids[c], pc, std::span<double>(lat, core->dim));
      for (int d = 0; d < core->dim; ++d) rl[c * core->dim + d] -= core->space->cell_measure[c] * lat[d];
    }
    return r;
  };

  p.jacobian = [core](std::span<const double> s, double alpha, std::span<const double>) {
    const std::size_t nu = core->nu;
    const std::size_t nl = core->cells * core->dim;
    const int dim = core->dim;
    TripletBuilder tb(nu + nl, nu + nl);
    tb.reserve(core->k.nnz() + 2 * core->coupling.nnz() + nl * dim);
    tb.add_block(core->k, 0, 0, alpha);
    tb.add_block(core->coupling, 0, nu);
    tb.add_block(core->coupling_t, nu, 0);
    double jac[4];
    for (std::size_t c = 0; c < core->cells; ++c) {
      const auto pc = s.subspan(nu + c * dim, dim);
      core->map.inverse_gradient_jacobian(core->space->centroids[c], pc, std::span<double>(jac, dim * dim));
      const double w = core->space->cell_measure[c];
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) tb.add(nu + c * dim + a, nu + c * dim + b, -w * jac[a * dim + b]);
      }
    }
    return tb.build();
  };

  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<int> blk;
    for (int d = 0; d < dim; ++d) blk.push_back(static_cast<int>(nu + c * dim + d));
    p.condensed_blocks.push_back(std::move(blk));
  }

  p.step_limit = hellinger_step_limit(nu, cells, dim);

  p.primal = [core](std::span<const double> s) { return core->space->extend(s.first(core->nu)); };
  p.latent_recovery = [core](std::span<const double> s) {
    const std::size_t nl = core->cells * core->dim;
    Vector out(nl);
    for (std::size_t c = 0; c < core->cells; ++c) {
      core->map.inverse_gradient(core->space->centroids[c], s.subspan(core->nu + c * core->dim, core->dim),
                                 std::span<double>(out.data() + c * core->dim, core->dim));
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
    for (std::size_t c = 0; c < core->cells; ++c) {
      m = std::min(m, core->map.feasibility_margin(core->space->centroids[c],
                                                   s.subspan(core->nu + c * core->dim, core->dim)));
    }
    return m;
  };
  // Cellwise |grad u~|, for active-set inspection.
  p.extras["gradient_norm"] = [core](std::span<const double> s) {
    Vector out(core->cells);
    double lat[2];
    for (std::size_t c = 0; c < core->cells; ++c) {
      const Point& x = core->space->centroids[c];
      core->map.inverse_gradient(x, s.subspan(core->nu + c * core->dim, core->dim),
                                 std::span<double>(lat, core->dim));
      double q = 0.0;
      for (int d = 0; d < core->dim; ++d) q += lat[d] * lat[d];
      out[c] = std::sqrt(q);
    }
    return out;
  };
  return p;
}

}  // namespace detail

GradientData gradient_preset(int n) {
  GradientData data;
  data.box = Box::unit();
  data.force = [](const Point& p) {
    const double s = std::sin(std::numbers::pi * p.x);
    return 15.0 * s * s;
  };
  data.radius = [](const Point& p) { return 0.1 + 0.2 * p.x + 0.4 * p.y; };
  data.n = n;
  return data;
}

SaddleProblem build_gradient_constraint(const GradientData& data) {
  if (!data.force || !data.radius) throw std::invalid_argument("build_gradient_constraint: force and bound required");
  std::shared_ptr<const P1Space> space;
  if (data.interval) {
    space = std::make_shared<P1Space>(make_p1_space(build_interval_mesh(data.n, data.box.x_min, data.box.x_max)));
  } else {
    space = std::make_shared<P1Space>(make_p1_space(build_tri_mesh(data.n, data.box)));
  }
  return detail::build_gradient_family(std::move(space), data.force, data.radius, 1.0, "gradient");
}

}  // namespace lvpp
