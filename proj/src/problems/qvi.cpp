#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gradient_family.hpp"

namespace lvpp {

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.empty() || knots_.size() != values_.size()) {
    throw std::invalid_argument("PiecewiseLinear: need matching, nonempty knots and values");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1])) throw std::invalid_argument("PiecewiseLinear: knots must increase");
  }
}

double PiecewiseLinear::operator()(double s) const {
  if (s <= knots_.front()) return values_.front();
  if (s >= knots_.back()) return values_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
  const double t = (s - knots_[j - 1]) / (knots_[j] - knots_[j - 1]);
  return values_[j - 1] + t * (values_[j] - values_[j - 1]);
}

double PiecewiseLinear::derivative(double s) const {
  if (s <= knots_.front() || s > knots_.back()) return 0.0;
  // First knot >= s closes the segment containing s from the left.
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
  return (values_[j] - values_[j - 1]) / (knots_[j] - knots_[j - 1]);
}

bool PiecewiseLinear::nonincreasing() const {
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] > values_[i - 1]) return false;
  }
  return true;
}

QviData qvi_preset(int n) {
  QviData data;
  data.box = Box::unit();
  data.beta = 1.0;
  data.smoothing = [](const Point& p) { return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y); };
  data.initial_mold = [](const Point& p) { return 1.0 - 2.0 * std::max(std::abs(p.x - 0.5), std::abs(p.y - 0.5)); };
  data.force = constant_field(25.0);
  data.heat_transfer = PiecewiseLinear({0.0, 1e-2}, {1.0, 0.0});
  data.n = n;
  return data;
}

AlphaSchedule qvi_schedule() {
  return AlphaSchedule::capped_geometric(1.0 / 64.0, 4.0, std::numeric_limits<double>::infinity());
}

namespace {

struct QviCore {
  std::shared_ptr<const P1Space> space;
  PiecewiseLinear g;
  double stabilization = 0.0;
  std::size_t nu = 0;  // free vertices
  std::size_t nt = 0;  // all vertices
  SparseMatrix k_free;
  SparseMatrix heat;   // K + beta M on all vertices
  SparseMatrix h1;     // K + M on free vertices
  Vector load;         // (f, v) on free vertices
  Vector weight;       // lumped mass on free vertices
  Vector xi;           // smoothing at all vertices
  Vector mold0;        // Phi_0 at all vertices
};

// Gap Phi - u at every vertex: exp(-psi) on free vertices, Phi_0 + xi T on
// the boundary where u = 0.
Vector gap_field(const QviCore& c, std::span<const double> s) {
  Vector gap(c.nt);
  for (std::size_t v = 0; v < c.nt; ++v) gap[v] = c.mold0[v] + c.xi[v] * s[2 * c.nu + v];
  for (std::size_t i = 0; i < c.nu; ++i) gap[c.space->free_nodes[i]] = saturated_exp(-s[c.nu + i]);
  return gap;
}

// Lumped (g(gap), q) for every vertex q.
Vector heat_source(const QviCore& c, std::span<const double> gap) {
  Vector out(c.nt);
  for (std::size_t v = 0; v < c.nt; ++v) out[v] = c.space->lumped_mass[v] * c.g(gap[v]);
  return out;
}

std::shared_ptr<QviCore> make_core(const QviData& data) {
  if (!(data.beta > 0.0)) throw std::invalid_argument("qvi: beta must be positive");
  if (!data.smoothing || !data.initial_mold || !data.force) {
    throw std::invalid_argument("qvi: smoothing, initial mold and force are required");
  }
  if (!data.heat_transfer.nonincreasing()) throw std::invalid_argument("qvi: the heat-transfer curve must be nonincreasing");
  auto space = std::make_shared<P1Space>(make_p1_space(build_tri_mesh(data.n, data.box)));
  const auto& free = space->free_nodes;
  auto c = std::make_shared<QviCore>(QviCore{space, data.heat_transfer, data.stabilization, free.size(),
                                             space->num_nodes(), {}, {}, {}, {}, {}, {}, {}});
  if (c->nu == 0) throw std::invalid_argument("qvi: mesh has no interior vertices");
  c->k_free = space->stiffness.submatrix(free, free);
  c->heat = add(space->stiffness, space->mass, 1.0, data.beta);
  c->h1 = add(c->k_free, space->mass.submatrix(free, free));
  const Vector load = assemble_load(std::get<TriMesh>(space->mesh), data.force);
  c->load.resize(c->nu);
  c->weight.resize(c->nu);
  for (std::size_t i = 0; i < c->nu; ++i) {
    c->load[i] = load[free[i]];
    c->weight[i] = space->lumped_mass[free[i]];
  }
  c->xi.resize(c->nt);
  c->mold0.resize(c->nt);
  for (std::size_t v = 0; v < c->nt; ++v) {
    c->xi[v] = data.smoothing(space->nodes[v]);
    c->mold0[v] = data.initial_mold(space->nodes[v]);
  }
  return c;
}

}  // namespace

SaddleProblem build_qvi_thermoforming(const QviData& data) {
  auto core = make_core(data);
  const std::size_t nu = core->nu;
  const std::size_t nt = core->nt;

  SaddleProblem p;
  p.name = "qvi";
  p.size = 2 * nu + nt;
  p.layout = {{"u", 0, nu}, {"psi", nu, nu}, {"T", 2 * nu, nt}};
  p.space = core->space;
  p.initial_state.assign(p.size, 0.0);
  std::fill(p.initial_state.begin() + static_cast<std::ptrdiff_t>(2 * nu), p.initial_state.end(), 1.0);

  // (grad T, grad q) + beta (T, q) = (g(exp(-psi)), q)
  // alpha (grad u, grad v) + (psi - psi_prev, v) = alpha (f, v)
  // u + exp(-psi) = Phi_0 + xi T at free vertices
  p.residual = [core](std::span<const double> s, double alpha, std::span<const double> prev) {
    const std::size_t nu = core->nu;
    const std::size_t nt = core->nt;
    Vector r(2 * nu + nt, 0.0);
    const auto u = s.first(nu);
    const auto temp = s.subspan(2 * nu, nt);
    std::span<double> ru(r.data(), nu);
    core->k_free.multiply_add(u, ru, alpha);
    for (std::size_t i = 0; i < nu; ++i) {
      const int v = core->space->free_nodes[i];
      ru[i] += core->weight[i] * (s[nu + i] - prev[nu + i]) - alpha * core->load[i];
      r[nu + i] = core->weight[i] *
                  (u[i] + saturated_exp(-s[nu + i]) - core->mold0[v] - core->xi[v] * temp[v]);
    }
    std::span<double> rt(r.data() + 2 * nu, nt);
    core->heat.multiply_add(temp, rt);
    const Vector src = heat_source(*core, gap_field(*core, s));
    for (std::size_t v = 0; v < nt; ++v) rt[v] -= src[v];
    return r;
  };

  p.jacobian = [core](std::span<const double> s, double alpha, std::span<const double>) {
    const std::size_t nu = core->nu;
    const std::size_t nt = core->nt;
    const Vector gap = gap_field(*core, s);
    TripletBuilder tb(2 * nu + nt, 2 * nu + nt);
    tb.reserve(core->k_free.nnz() * 2 + core->heat.nnz() + 5 * nu + nt);
    tb.add_block(core->k_free, 0, 0, alpha);
    // Jacobian-only stabilization -(stabilization / alpha) (grad psi, grad w).
    if (core->stabilization != 0.0) tb.add_block(core->k_free, nu, nu, -core->stabilization / alpha);
    tb.add_block(core->heat, 2 * nu, 2 * nu);
    for (std::size_t i = 0; i < nu; ++i) {
      const int v = core->space->free_nodes[i];
      const double w = core->weight[i];
      const double e = saturated_exp(-s[nu + i]);
      tb.add(i, nu + i, w);
      tb.add(nu + i, i, w);
      tb.add(nu + i, nu + i, -w * e);
      tb.add(nu + i, 2 * nu + v, -w * core->xi[v]);
      // d/dpsi of -(g(exp(-psi)), q)
      tb.add(2 * nu + v, nu + i, core->space->lumped_mass[v] * core->g.derivative(gap[v]) * e);
    }
    for (std::size_t v = 0; v < nt; ++v) {
      if (core->space->free_index[v] >= 0) continue;
      const double d = core->g.derivative(gap[v]) * core->xi[v];
      if (d != 0.0) tb.add(2 * nu + v, 2 * nu + v, -core->space->lumped_mass[v] * d);
    }
    return tb.build();
  };

  p.primal = [core](std::span<const double> s) { return core->space->extend(s.first(core->nu)); };
  p.latent_recovery = [core](std::span<const double> s) {
    Vector out(core->nt, 0.0);
    for (std::size_t i = 0; i < core->nu; ++i) {
      const int v = core->space->free_nodes[i];
      out[v] = core->mold0[v] + core->xi[v] * s[2 * core->nu + v] - saturated_exp(-s[core->nu + i]);
    }
    return out;
  };
  p.extras["mold"] = [core](std::span<const double> s) {
    Vector out(core->nt);
    for (std::size_t v = 0; v < core->nt; ++v) out[v] = core->mold0[v] + core->xi[v] * s[2 * core->nu + v];
    return out;
  };
  p.extras["temperature"] = [core](std::span<const double> s) {
    const auto t = s.subspan(2 * core->nu, core->nt);
    return Vector(t.begin(), t.end());
  };
  p.increment_norm = [core](std::span<const double> s, std::span<const double> prev) {
    Vector d(core->nu);
    for (std::size_t i = 0; i < core->nu; ++i) d[i] = s[i] - prev[i];
    return std::sqrt(std::max(0.0, core->h1.quadratic_form(d)));
  };
  // Slack of the membrane below the mold.
  p.feasibility_margin = [core](std::span<const double> s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < core->nu; ++i) m = std::min(m, saturated_exp(-s[core->nu + i]));
    return m;
  };
  return p;
}

QviResidual qvi_residual(const QviData& data, const SaddleProblem& problem, std::span<const double> state) {
  auto core = make_core(data);
  if (state.size() != 2 * core->nu + core->nt || problem.size != state.size()) {
    throw std::invalid_argument("qvi_residual: state does not match the problem");
  }
  const Vector u = problem.primal(state);
  const auto temp = state.subspan(2 * core->nu, core->nt);

  Vector heat(core->nt, 0.0);
  core->heat.multiply_add(temp, heat);
  for (std::size_t v = 0; v < core->nt; ++v) {
    const double gap = core->mold0[v] + core->xi[v] * temp[v] - u[v];
    heat[v] -= core->space->lumped_mass[v] * core->g(gap);
  }

  Vector comp(core->nu);
  const Vector ku = core->space->stiffness.multiply(u);
  for (std::size_t i = 0; i < core->nu; ++i) {
    const int v = core->space->free_nodes[i];
    const double multiplier = core->load[i] - ku[v];
    const double gap = core->weight[i] * (core->mold0[v] + core->xi[v] * temp[v] - u[v]);
    comp[i] = std::min(multiplier, gap);
  }
  return {norm2(heat), norm2(comp)};
}

Vector qvi_temperature_for_membrane(const QviData& data, std::span<const double> u_full) {
  auto core = make_core(data);
  if (u_full.size() != core->nt) throw std::invalid_argument("qvi_temperature_for_membrane: wrong membrane size");
  NonlinearSystem system;
  system.residual = [&](std::span<const double> t) {
    Vector r(core->nt, 0.0);
    core->heat.multiply_add(t, r);
    for (std::size_t v = 0; v < core->nt; ++v) {
      r[v] -= core->space->lumped_mass[v] * core->g(core->mold0[v] + core->xi[v] * t[v] - u_full[v]);
    }
    return r;
  };
  system.jacobian = [&](std::span<const double> t) {
    Vector d(core->nt);
    for (std::size_t v = 0; v < core->nt; ++v) {
      d[v] = -core->space->lumped_mass[v] * core->xi[v] *
             core->g.derivative(core->mold0[v] + core->xi[v] * t[v] - u_full[v]);
    }
    return add(core->heat, SparseMatrix::diagonal(d));
  };
  NewtonConfig cfg;
  cfg.tolerance = 1e-12;
  NewtonResult res = newton_solve(system, Vector(core->nt, 1.0), cfg);
  if (!res.report.converged) throw std::runtime_error("qvi_temperature_for_membrane: Newton did not converge");
  return res.x;
}

}  // namespace lvpp
