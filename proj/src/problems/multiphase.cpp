#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lvpp/problems.hpp"

namespace lvpp {

MultiphaseData multiphase_preset(int n, int steps) {
  MultiphaseData data;
  data.n = n;
  data.steps = steps;
  // Four quadrants blended across tanh layers of width delta.
  constexpr double delta = 0.05;
  data.initial = [](const Point& p) {
    const double sx = 0.5 * (1.0 + std::tanh((p.x - 0.5) / delta));
    const double sy = 0.5 * (1.0 + std::tanh((p.y - 0.5) / delta));
    return Vector{(1.0 - sx) * (1.0 - sy), sx * (1.0 - sy), (1.0 - sx) * sy, sx * sy};
  };
  return data;
}

namespace {

constexpr double kSimplexTolerance = 1e-10;

struct MultiphaseCore {
  std::shared_ptr<const P1Space> space;
  LegendreMap map;
  int m = 0;
  std::size_t nn = 0;
  double eps2 = 0.0;
  double tau = 0.0;
  SparseMatrix mass;
  SparseMatrix stiffness;
  Vector mass_ones;  // (1, y) for each test function
  Vector rhs_b;      // M u_prev, phase-major
};

void check_simplex(std::span<const double> u, int m, std::size_t nn) {
  for (std::size_t v = 0; v < nn; ++v) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = u[i * nn + v];
      if (!(x >= -kSimplexTolerance)) throw std::invalid_argument("multiphase: previous state has a negative phase");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw std::invalid_argument("multiphase: previous state is off the simplex");
    }
  }
}

}  // namespace

SaddleProblem build_multiphase_step(const MultiphaseData& data, std::shared_ptr<const P1Space> space,
                                    std::span<const double> u_prev, std::span<const double> warm_start) {
  if (data.phases < 2) throw std::invalid_argument("multiphase: need at least two phases");
  if (!(data.epsilon > 0.0) || !(data.tau > 0.0)) throw std::invalid_argument("multiphase: epsilon and tau must be positive");
  const int m = data.phases;
  const std::size_t nn = space->num_nodes();
  const std::size_t nf = static_cast<std::size_t>(m) * nn;
  if (u_prev.size() != nf) throw std::invalid_argument("multiphase: previous state has the wrong size");
  if (!warm_start.empty() && warm_start.size() != 3 * nf) throw std::invalid_argument("multiphase: warm start has the wrong size");
  check_simplex(u_prev, m, nn);

  auto core = std::make_shared<MultiphaseCore>(MultiphaseCore{space, LegendreMap::simplex(m), m, nn,
                                                             data.epsilon * data.epsilon, data.tau, space->mass,
                                                             space->stiffness, space->mass.row_sums(), Vector(nf)});
  for (int i = 0; i < m; ++i) {
    core->mass.multiply_add(u_prev.subspan(i * nn, nn), std::span<double>(core->rhs_b.data() + i * nn, nn));
  }

  SaddleProblem p;
  p.name = "multiphase";
  p.size = 3 * nf;
  p.layout = {{"u", 0, nf}, {"z", nf, nf}, {"psi", 2 * nf, nf}};
  p.space = space;
  // Starts from the previous time level.
  p.initial_state.assign(3 * nf, 0.0);
  std::copy(u_prev.begin(), u_prev.end(), p.initial_state.begin());
  if (!warm_start.empty()) {
    std::copy(warm_start.begin() + nf, warm_start.end(), p.initial_state.begin() + nf);
  } else if (data.latent_start == LatentStart::Consistent) {
    for (std::size_t j = 0; j < nf; ++j) {
      p.initial_state[2 * nf + j] = std::log(std::max(u_prev[j], std::numeric_limits<double>::min()));
    }
  }

  // Per phase i, with M_L the lumped mass:
  //   a: alpha M z + eps^2 alpha K u - 2 alpha M u + M_L (psi - psi_prev) + alpha M 1 = 0
  //   b: M u - tau K z - M u_prev = 0
  //   c: M_L (u - softmax(psi)_i) = 0
  // With natural boundary conditions (z_i - c / alpha, psi_i + c) solves
  // whenever (z_i, psi_i) does, and the c rows summed over phases and nodes
  // equal the b rows summed the same way. The c row of phase 0 at vertex 0
  // is therefore replaced by the gauge sum_i (psi_i - psi_prev_i) = 0 there.
  p.residual = [core](std::span<const double> s, double alpha, std::span<const double> prev) {
    const std::size_t nn = core->nn;
    const std::size_t nf = core->m * nn;
    const Vector& w = core->space->lumped_mass;
    Vector r(3 * nf, 0.0);
    for (int i = 0; i < core->m; ++i) {
      const auto u = s.subspan(i * nn, nn);
      const auto z = s.subspan(nf + i * nn, nn);
      std::span<double> ra(r.data() + i * nn, nn);
      std::span<double> rb(r.data() + nf + i * nn, nn);
      core->mass.multiply_add(z, ra, alpha);
      core->stiffness.multiply_add(u, ra, alpha * core->eps2);
      core->mass.multiply_add(u, ra, -2.0 * alpha);
      core->mass.multiply_add(u, rb);
      core->stiffness.multiply_add(z, rb, -core->tau);
      for (std::size_t v = 0; v < nn; ++v) {
        const std::size_t j = 2 * nf + i * nn + v;
        ra[v] += w[v] * (s[j] - prev[j]) + alpha * core->mass_ones[v];
        rb[v] -= core->rhs_b[i * nn + v];
      }
    }
    Vector psi(core->m), lat(core->m);
    for (std::size_t v = 0; v < nn; ++v) {
      for (int i = 0; i < core->m; ++i) psi[i] = s[2 * nf + i * nn + v];
      core->map.inverse_gradient(core->space->nodes[v], psi, lat);
      for (int i = 0; i < core->m; ++i) r[2 * nf + i * nn + v] = w[v] * (s[i * nn + v] - lat[i]);
    }
    double gauge = 0.0;
    for (int i = 0; i < core->m; ++i) gauge += s[2 * nf + i * nn] - prev[2 * nf + i * nn];
    r[2 * nf] = w[0] * gauge;
    return r;
  };

  p.jacobian = [core](std::span<const double> s, double alpha, std::span<const double>) {
    const std::size_t nn = core->nn;
    const int m = core->m;
    const std::size_t nf = m * nn;
    const Vector& w = core->space->lumped_mass;
    const SparseMatrix a_uu = add(core->stiffness, core->mass, alpha * core->eps2, -2.0 * alpha);
    TripletBuilder tb(3 * nf, 3 * nf);
    tb.reserve(m * (a_uu.nnz() + 3 * core->mass.nnz() + 2 * nn) + nn * m * m);
    for (int i = 0; i < m; ++i) {
      const std::size_t u0 = i * nn, z0 = nf + i * nn, p0 = 2 * nf + i * nn;
      tb.add_block(core->mass, u0, z0, alpha);
      tb.add_block(a_uu, u0, u0);
      tb.add_block(core->mass, z0, u0);
      tb.add_block(core->stiffness, z0, z0, -core->tau);
      for (std::size_t v = 0; v < nn; ++v) {
        tb.add(u0 + v, p0 + v, w[v]);
        if (i > 0 || v > 0) tb.add(p0 + v, u0 + v, w[v]);
      }
    }
    for (int j = 0; j < m; ++j) tb.add(2 * nf, 2 * nf + j * nn, w[0]);
    Vector psi(m), jac(static_cast<std::size_t>(m) * m);
    for (std::size_t v = 0; v < nn; ++v) {
      for (int i = 0; i < m; ++i) psi[i] = s[2 * nf + i * nn + v];
      core->map.inverse_gradient_jacobian(core->space->nodes[v], psi, jac);
      for (int i = (v == 0 ? 1 : 0); i < m; ++i) {
        for (int j = 0; j < m; ++j) tb.add(2 * nf + i * nn + v, 2 * nf + j * nn + v, -w[v] * jac[i * m + j]);
      }
    }
    return tb.build();
  };

  p.primal = [nf](std::span<const double> s) { return Vector(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(nf)); };
  p.latent_recovery = [core](std::span<const double> s) {
    const std::size_t nn = core->nn;
    const std::size_t nf = core->m * nn;
    Vector out(nf), psi(core->m), lat(core->m);
    for (std::size_t v = 0; v < nn; ++v) {
      for (int i = 0; i < core->m; ++i) psi[i] = s[2 * nf + i * nn + v];
      core->map.inverse_gradient(core->space->nodes[v], psi, lat);
      for (int i = 0; i < core->m; ++i) out[i * nn + v] = lat[i];
    }
    return out;
  };
  // L2 norm of the increment over all phases.
  p.increment_norm = [core](std::span<const double> s, std::span<const double> prev) {
    const std::size_t nn = core->nn;
    double q = 0.0;
    Vector d(nn);
    for (int i = 0; i < core->m; ++i) {
      for (std::size_t v = 0; v < nn; ++v) d[v] = s[i * nn + v] - prev[i * nn + v];
      q += core->mass.quadratic_form(d);
    }
    return std::sqrt(std::max(0.0, q));
  };
  p.feasibility_margin = [core](std::span<const double> s) {
    const std::size_t nn = core->nn;
    const std::size_t nf = core->m * nn;
    double margin = std::numeric_limits<double>::infinity();
    Vector psi(core->m);
    for (std::size_t v = 0; v < nn; ++v) {
      for (int i = 0; i < core->m; ++i) psi[i] = s[2 * nf + i * nn + v];
      margin = std::min(margin, core->map.feasibility_margin(core->space->nodes[v], psi));
    }
    return margin;
  };
  return p;
}

MultiphaseRun run_multiphase(const MultiphaseData& data, const NewtonConfig& newton, double tolerance,
                             int max_outer) {
  if (!data.initial) throw std::invalid_argument("multiphase: initial phase fields required");
  if (data.steps < 0) throw std::invalid_argument("multiphase: negative step count");
  MultiphaseRun run;
  run.space = std::make_shared<P1Space>(make_p1_space(build_tri_mesh(data.n, Box::unit())));
  const std::size_t nn = run.space->num_nodes();
  const int m = data.phases;

  Vector u(static_cast<std::size_t>(m) * nn);
  for (std::size_t v = 0; v < nn; ++v) {
    const Vector a = data.initial(run.space->nodes[v]);
    if (a.size() != static_cast<std::size_t>(m)) throw std::invalid_argument("multiphase: initial data has the wrong phase count");
    for (int i = 0; i < m; ++i) u[i * nn + v] = a[i];
  }

  auto record_mass = [&](const Vector& x) {
    std::vector<double> totals(m);
    for (int i = 0; i < m; ++i) {
      totals[i] = 0.0;
      for (std::size_t v = 0; v < nn; ++v) totals[i] += run.space->lumped_mass[v] * x[i * nn + v];
    }
    run.phase_mass.push_back(std::move(totals));
  };
  record_mass(u);

  LvppConfig cfg;
  cfg.schedule = AlphaSchedule::constant(1.0);
  cfg.tolerance = tolerance;
  cfg.max_iterations = max_outer;
  cfg.newton = newton;
  run.u = u;
  Vector warm;
  for (int step = 0; step < data.steps; ++step) {
    const SaddleProblem p = build_multiphase_step(data, run.space, run.u, warm);
    LvppResult r = run_lvpp(p, cfg);
    if (!r.trace.converged) throw LvppError("multiphase: time step did not converge", r.trace);
    for (std::size_t v = 0; v < nn; ++v) {
      double sum = 0.0;
      for (int i = 0; i < m; ++i) {
        sum += r.latent[i * nn + v];
        run.min_fraction = std::min(run.min_fraction, r.latent[i * nn + v]);
      }
      run.max_sum_defect = std::max(run.max_sum_defect, std::abs(sum - 1.0));
    }
    if (data.latent_start == LatentStart::Consistent) warm = std::move(r.state);
    run.u = std::move(r.primal);
    run.latent = std::move(r.latent);
    run.steps.push_back(std::move(r.trace));
    record_mass(run.u);
  }
  if (data.steps == 0) run.latent = run.u;
  return run;
}

}  // namespace lvpp
