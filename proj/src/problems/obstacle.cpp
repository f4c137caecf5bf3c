#include <cmath>
#include <limits>
#include <stdexcept>

#include "lvpp/error.hpp"
#include "lvpp/problems.hpp"

namespace lvpp {

double benchmark_obstacle(const Point& p) {
  constexpr double b = 9.0 / 20.0;
  const double d = std::sqrt(0.25 - b * b);
  const double r = std::hypot(p.x, p.y);
  if (r <= b) return std::sqrt(0.25 - r * r);
  return d + b * b / d - b * r / d;
}

ObstacleData obstacle_benchmark(Backend backend, int n) {
  ObstacleData data;
  data.box = Box::square(-1.0, 1.0);
  data.lower = benchmark_obstacle;
  data.backend = backend;
  data.n = n;
  return data;
}

int fd_points_for_mesh_size(double h) {
  if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("fd_points_for_mesh_size: h must lie in (0, 1]");
  const double n = 2.0 / h - 1.0;
  const long rounded = std::lround(n);
  if (std::abs(n - static_cast<double>(rounded)) > 1e-9) {
    throw std::invalid_argument("fd_points_for_mesh_size: 2/h must be an integer");
  }
  return static_cast<int>(rounded);
}

namespace {

// Shared state of an obstacle problem over its constrained nodes.
struct ObstacleCore {
  LegendreMap map;
  std::vector<Point> points;
  std::size_t n = 0;
  // Operator and right side of the primal equation: A u = rhs (strong FD
  // form, or the free-node block of the weak form).
  SparseMatrix a;
  Vector rhs;
  // Weights of the latent pairing: 1 for FD, lumped mass for P1.
  Vector weight;
  // Gram matrix of the increment norm (empty: Euclidean).
  SparseMatrix gram;
  Vector psi0;
};

void check_bounds(const ObstacleData& data, const Point& p, double g) {
  const double lo = data.lower(p);
  if (data.upper) {
    const double hi = data.upper(p);
    if (!(lo < hi)) throw std::invalid_argument("build_obstacle: lower obstacle must lie below the upper one");
    if (g > hi) throw std::invalid_argument("build_obstacle: infeasible boundary data (g above the upper obstacle)");
  }
  if (g < lo) throw std::invalid_argument("build_obstacle: infeasible boundary data (g below the obstacle)");
}

LegendreMap obstacle_map(const ObstacleData& data) {
  return data.upper ? LegendreMap::fermi_dirac(data.lower, data.upper) : LegendreMap::shannon_lower(data.lower);
}

SaddleProblem assemble_problem(std::shared_ptr<const ObstacleCore> core, std::string name,
                               std::function<Vector(std::span<const double>)> primal) {
  const std::size_t n = core->n;
  SaddleProblem p;
  p.name = std::move(name);
  p.size = 2 * n;
  p.layout = {{"u", 0, n}, {"psi", n, n}};
  if (!core->psi0.empty()) {
    p.initial_state.assign(2 * n, 0.0);
    std::copy(core->psi0.begin(), core->psi0.end(), p.initial_state.begin() + static_cast<std::ptrdiff_t>(n));
  }

  p.residual = [core](std::span<const double> s, double alpha, std::span<const double> prev) {
    const std::size_t n = core->n;
    const auto u = s.first(n);
    const auto psi = s.subspan(n, n);
    const auto psi_prev = prev.subspan(n, n);
    Vector r(2 * n);
    std::span<double> r1(r.data(), n);
    core->a.multiply_add(u, r1, alpha);
    for (std::size_t i = 0; i < n; ++i) {
      r1[i] += -alpha * core->rhs[i] + core->weight[i] * (psi[i] - psi_prev[i]);
      double lat = 0.0;
      core->map.inverse_gradient(core->points[i], psi.subspan(i, 1), std::span<double>(&lat, 1));
      r[n + i] = core->weight[i] * (u[i] - lat);
    }
    return r;
  };

  p.jacobian = [core](std::span<const double> s, double alpha, std::span<const double>) {
    const std::size_t n = core->n;
    const auto psi = s.subspan(n, n);
    TripletBuilder tb(2 * n, 2 * n);
    tb.reserve(core->a.nnz() + 3 * n);
    tb.add_block(core->a, 0, 0, alpha);
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      core->map.inverse_gradient_jacobian(core->points[i], psi.subspan(i, 1), std::span<double>(&d, 1));
      tb.add(i, n + i, core->weight[i]);
      tb.add(n + i, i, core->weight[i]);
      tb.add(n + i, n + i, -core->weight[i] * d);
    }
    return tb.build();
  };

  p.primal = std::move(primal);

  p.increment_norm = [core](std::span<const double> s, std::span<const double> prev) {
    Vector d(core->n);
    for (std::size_t i = 0; i < core->n; ++i) d[i] = s[i] - prev[i];
    if (core->gram.rows() == 0) return norm2(d);
    return std::sqrt(std::max(0.0, core->gram.quadratic_form(d)));
  };

  p.feasibility_margin = [core](std::span<const double> s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < core->n; ++i) {
      m = std::min(m, core->map.feasibility_margin(core->points[i], s.subspan(core->n + i, 1)));
    }
    return m;
  };
  return p;
}

Vector consistent_latent_start(const ObstacleCore& core) {
  Vector psi(core.n);
  const double zero = 0.0;
  for (std::size_t i = 0; i < core.n; ++i) {
    try {
      psi[i] = core.map.gradient(core.points[i], std::span<const double>(&zero, 1))[0];
    } catch (const std::domain_error&) {
      throw std::invalid_argument("build_obstacle: consistent latent start needs the zero field strictly feasible");
    }
  }
  return psi;
}

SaddleProblem build_fd(const ObstacleData& data) {
  const Grid2D grid = build_grid2d(data.n, data.box);
  auto core = std::make_shared<ObstacleCore>(ObstacleCore{obstacle_map(data), {}, grid.size(), fd_laplacian(grid),
                                                         {}, Vector(grid.size(), 1.0), {}, {}});
  core->points.resize(core->n);
  core->rhs.assign(core->n, 0.0);
  const double wx = 1.0 / (grid.hx * grid.hx);
  const double wy = 1.0 / (grid.hy * grid.hy);
  const Box& box = grid.box;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const Point p = grid.node(i, j);
      core->points[k] = p;
      double b = data.force(p);
      // Dirichlet neighbours move to the right side.
      if (i == 0) b += wx * data.boundary({box.x_min, p.y});
      if (i == grid.nx - 1) b += wx * data.boundary({box.x_max, p.y});
      if (j == 0) b += wy * data.boundary({p.x, box.y_min});
      if (j == grid.ny - 1) b += wy * data.boundary({p.x, box.y_max});
      core->rhs[k] = b;
      const double lo = data.lower(p);
      if (data.upper && !(lo < data.upper(p))) {
        throw std::invalid_argument("build_obstacle: lower obstacle must lie below the upper one");
      }
    }
  }
  // Boundary data against the obstacle, along the four edges at grid spacing.
  for (int i = 0; i <= grid.nx + 1; ++i) {
    const double x = box.x_min + i * grid.hx;
    for (double y : {box.y_min, box.y_max}) check_bounds(data, {x, y}, data.boundary({x, y}));
  }
  for (int j = 0; j <= grid.ny + 1; ++j) {
    const double y = box.y_min + j * grid.hy;
    for (double x : {box.x_min, box.x_max}) check_bounds(data, {x, y}, data.boundary({x, y}));
  }
  if (data.latent_start == LatentStart::Consistent) core->psi0 = consistent_latent_start(*core);

  const std::size_t n = core->n;
  SaddleProblem p = assemble_problem(core, "obstacle-fd", [n](std::span<const double> s) {
    return Vector(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
  });
  p.latent_recovery = [core](std::span<const double> s) {
    Vector out(core->n);
    for (std::size_t i = 0; i < core->n; ++i) {
      core->map.inverse_gradient(core->points[i], s.subspan(core->n + i, 1), std::span<double>(&out[i], 1));
    }
    return out;
  };
  p.grid = std::make_shared<Grid2D>(grid);
  return p;
}

std::shared_ptr<const P1Space> obstacle_space(const ObstacleData& data) {
  if (data.interval) {
    return std::make_shared<P1Space>(make_p1_space(build_interval_mesh(data.n, data.box.x_min, data.box.x_max)));
  }
  return std::make_shared<P1Space>(make_p1_space(build_tri_mesh(data.n, data.box)));
}

SaddleProblem build_p1(const ObstacleData& data) {
  auto space = obstacle_space(data);
  const auto& free = space->free_nodes;
  const std::size_t n = free.size();
  if (n == 0) throw std::invalid_argument("build_obstacle: mesh has no interior vertices");

  Vector g(space->num_nodes(), 0.0);
  for (std::size_t v = 0; v < space->num_nodes(); ++v) {
    if (!space->boundary[v]) continue;
    g[v] = data.boundary(space->nodes[v]);
    check_bounds(data, space->nodes[v], g[v]);
  }
  const Vector load = std::visit([&](const auto& m) { return assemble_load(m, data.force); }, space->mesh);
  const Vector lift = space->stiffness.multiply(g);

  auto core = std::make_shared<ObstacleCore>(ObstacleCore{obstacle_map(data), {}, n,
                                                         space->stiffness.submatrix(free, free), Vector(n),
                                                         Vector(n), space->mass.submatrix(free, free), {}});
  core->points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int v = free[i];
    core->points[i] = space->nodes[v];
    core->rhs[i] = load[v] - lift[v];
    core->weight[i] = space->lumped_mass[v];
    const double lo = data.lower(space->nodes[v]);
    if (data.upper && !(lo < data.upper(space->nodes[v]))) {
      throw std::invalid_argument("build_obstacle: lower obstacle must lie below the upper one");
    }
  }
  if (data.latent_start == LatentStart::Consistent) core->psi0 = consistent_latent_start(*core);

  auto full = [space, g, n](std::span<const double> vals) {
    Vector out = g;
    for (std::size_t i = 0; i < n; ++i) out[space->free_nodes[i]] = vals[i];
    return out;
  };
  SaddleProblem p = assemble_problem(core, "obstacle-fem", [full, n](std::span<const double> s) {
    return full(s.first(n));
  });
  p.latent_recovery = [core, full](std::span<const double> s) {
    Vector lat(core->n);
    for (std::size_t i = 0; i < core->n; ++i) {
      core->map.inverse_gradient(core->points[i], s.subspan(core->n + i, 1), std::span<double>(&lat[i], 1));
    }
    return full(lat);
  };
  p.space = space;
  return p;
}

}  // namespace

SaddleProblem build_obstacle(const ObstacleData& data) {
  if (!data.lower) throw std::invalid_argument("build_obstacle: a lower obstacle is required");
  if (!data.force || !data.boundary) throw std::invalid_argument("build_obstacle: force and boundary data required");
  if (data.backend == Backend::FiniteDifference) {
    if (data.interval) throw std::invalid_argument("build_obstacle: the FD backend is two-dimensional only");
    return build_fd(data);
  }
  return build_p1(data);
}

}  // namespace lvpp
