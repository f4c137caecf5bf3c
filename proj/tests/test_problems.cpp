#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lvpp/assembly.hpp"
#include "lvpp/lvpp.hpp"
#include "lvpp/problems.hpp"
#include "lvpp/solvers.hpp"

using namespace lvpp;
using doctest::Approx;
using std::numbers::pi;

namespace {

LvppConfig config(AlphaSchedule schedule, double tol, int max_iterations = 100) {
  LvppConfig cfg;
  cfg.schedule = std::move(schedule);
  cfg.tolerance = tol;
  cfg.max_iterations = max_iterations;
  return cfg;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Direct P1 solve of -Lap u = f with zero Dirichlet data on the space's mesh.
Vector p1_poisson(const P1Space& s, const ScalarField& f) {
  const Vector load = std::visit([&](const auto& m) { return assemble_load(m, f); }, s.mesh);
  Vector rhs(s.num_free());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = load[s.free_nodes[k]];
  return s.extend(solve_sparse(s.stiffness.submatrix(s.free_nodes, s.free_nodes), rhs));
}

}  // namespace

TEST_SUITE("problems") {
  TEST_CASE("benchmark obstacle formula") {
    const double b = 0.45, d = std::sqrt(0.25 - b * b);
    CHECK(benchmark_obstacle({0.0, 0.0}) == Approx(0.5));
    CHECK(benchmark_obstacle({0.3, 0.0}) == Approx(std::sqrt(0.25 - 0.09)));
    CHECK(benchmark_obstacle({0.0, 0.8}) == Approx(d + b * b / d - b * 0.8 / d));
    // Continuous at r = b.
    CHECK(benchmark_obstacle({b - 1e-12, 0.0}) == Approx(benchmark_obstacle({b + 1e-12, 0.0})));
    CHECK(fd_points_for_mesh_size(0.5) == 3);
    CHECK(fd_points_for_mesh_size(1.0 / 64.0) == 127);
    CHECK_THROWS_AS(fd_points_for_mesh_size(0.3), std::invalid_argument);
  }

  TEST_CASE("obstacle builder validates data") {
    ObstacleData d;
    d.lower = constant_field(0.5);
    CHECK_THROWS_AS(build_obstacle(d), std::invalid_argument);  // g = 0 below the obstacle
    d.lower = constant_field(-1.0);
    d.upper = constant_field(-2.0);
    CHECK_THROWS_AS(build_obstacle(d), std::invalid_argument);
    d.upper = constant_field(1.0);
    d.backend = Backend::P1;
    CHECK_NOTHROW(build_obstacle(d));
  }

  TEST_CASE("bilateral obstacle stays strictly inside") {
    for (Backend backend : {Backend::FiniteDifference, Backend::P1}) {
      ObstacleData d;
      d.lower = constant_field(-1.0);
      d.upper = constant_field(1.0);
      d.force = constant_field(50.0);
      d.backend = backend;
      d.n = 15;
      const SaddleProblem p = build_obstacle(d);
      const LvppResult r = run_lvpp(p, config(AlphaSchedule::double_exponential(), 1e-9));
      CHECK(r.trace.converged);
      double top = 0.0;
      for (double v : r.latent) top = std::max(top, v);
      CHECK(top > 0.99);  // the upper obstacle is active in the middle
      // Near the active set the recovery rounds to the bound; the slack itself
      // is evaluated in a cancellation-free form and stays positive.
      CHECK(p.feasibility_margin(r.state) > 0.0);
      for (double v : r.latent) {
        CHECK(v <= 1.0);
        CHECK(v >= -1.0);
      }
    }
  }

  TEST_CASE("obstacle complementarity at convergence") {
    const double tol = 1e-9;
    const SaddleProblem p = build_obstacle(obstacle_benchmark(Backend::FiniteDifference, 31));
    Vector before, after;
    double alpha = 0.0;
    LvppConfig cfg = config(AlphaSchedule::double_exponential(), tol);
    cfg.observer = [&](const LvppIterate& it, std::span<const double> s) {
      before = after;
      after.assign(s.begin(), s.end());
      alpha = it.alpha;
    };
    const LvppResult r = run_lvpp(p, cfg);
    REQUIRE(r.trace.converged);
    const auto psi_prev = p.view(before, "psi");
    const auto psi = p.view(after, "psi");
    double worst = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double lambda = (psi_prev[i] - psi[i]) / alpha;
      const double gap = r.latent[i] - benchmark_obstacle(p.grid->node(i));
      worst = std::max(worst, std::abs(std::min(lambda, gap)));
    }
    CHECK(worst <= 10.0 * tol);
  }

  TEST_CASE("FD and P1 obstacle solutions agree to O(h)") {
    const SaddleProblem fd = build_obstacle(obstacle_benchmark(Backend::FiniteDifference, 31));
    const SaddleProblem fem = build_obstacle(obstacle_benchmark(Backend::P1, 32));
    const LvppResult a = run_lvpp(fd, config(AlphaSchedule::double_exponential(), 1e-9));
    const LvppResult b = run_lvpp(fem, config(AlphaSchedule::double_exponential(), 1e-9));
    REQUIRE(a.trace.converged);
    REQUIRE(b.trace.converged);
    // Both place nodes on the same lattice of spacing 1/16.
    double diff = 0.0;
    for (std::size_t k = 0; k < fd.grid->size(); ++k) {
      const Point x = fd.grid->node(k);
      for (std::size_t v = 0; v < fem.space->num_nodes(); ++v) {
        const Point y = fem.space->nodes[v];
        if (std::abs(x.x - y.x) < 1e-12 && std::abs(x.y - y.y) < 1e-12) diff = std::max(diff, std::abs(a.primal[k] - b.primal[v]));
      }
    }
    CHECK(diff > 0.0);
    CHECK(diff <= 1.0 / 16.0);
  }

  TEST_CASE("gradient constraint: inactive bound matches Poisson") {
    GradientData d;
    d.n = 16;
    d.force = [](const Point& p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
    d.radius = constant_field(100.0);
    const SaddleProblem p = build_gradient_constraint(d);
    const LvppResult r = run_lvpp(p, config(AlphaSchedule::capped_geometric(1.0, 2.0, 1e6), 1e-10));
    REQUIRE(r.trace.converged);
    const Vector ref = p1_poisson(*p.space, d.force);
    CHECK(max_abs_diff(r.primal, ref) < 1e-8);
    for (double g : p.extras.at("gradient_norm")(r.state)) CHECK(g < 100.0 - 1e-8);
  }

  TEST_CASE("gradient constraint: zero force gives zero") {
    GradientData d;
    d.n = 8;
    d.force = constant_field(0.0);
    d.radius = constant_field(0.3);
    const SaddleProblem p = build_gradient_constraint(d);
    const LvppResult r = run_lvpp(p, config(AlphaSchedule::capped_geometric(1.0, 2.0, 1e6), 1e-8));
    CHECK(r.trace.converged);
    for (double v : r.state) CHECK(std::abs(v) < 1e-12);
    d.radius = [](const Point& q) { return q.x - 0.5; };
    CHECK_THROWS_AS(build_gradient_constraint(d), std::invalid_argument);
  }

  TEST_CASE("gradient constraint: the preset has an active set") {
    const GradientData d = gradient_preset(32);
    const SaddleProblem p = build_gradient_constraint(d);
    const LvppResult r = run_lvpp(p, config(AlphaSchedule::capped_geometric(1.0, 2.0, 1e6), 1e-8));
    REQUIRE(r.trace.converged);
    const Vector norms = p.extras.at("gradient_norm")(r.state);
    int active = 0;
    for (std::size_t c = 0; c < norms.size(); ++c) {
      const double phi = d.radius(p.space->centroids[c]);
      CHECK(norms[c] < phi);
      if (norms[c] >= phi - 1e-8) ++active;
    }
    CHECK(active > 0);
  }

  TEST_CASE("intersection: loose slope cap reduces to the obstacle problem") {
    IntersectionData d;
    d.slope_cap = 100.0;
    const SaddleProblem p = build_intersection(d);
    const LvppResult r = run_lvpp(p, config(intersection_schedule(), 1e-11, 200));
    REQUIRE(r.trace.converged);

    ObstacleData o;
    o.box = Box{0.0, 1.0, 0.0, 1.0};
    o.interval = true;
    o.backend = Backend::P1;
    o.n = d.n;
    o.lower = [](const Point& q) { return bump_obstacle(q.x); };
    const SaddleProblem q = build_obstacle(o);
    const LvppResult s = run_lvpp(q, config(intersection_schedule(), 1e-11, 200));
    REQUIRE(s.trace.converged);
    CHECK(max_abs_diff(r.primal, s.primal) < 1e-8);
  }

  TEST_CASE("intersection: tighter slope cap lowers u(0.2)") {
    double last = 1e300;
    for (double cap : {100.0, 10.0, 5.0, 3.0, 2.0}) {
      IntersectionData d;
      d.slope_cap = cap;
      const SaddleProblem p = build_intersection(d);
      const LvppResult r = run_lvpp(p, config(intersection_schedule(), 1e-8, 200));
      REQUIRE(r.trace.converged);
      // Node 40 of 200 cells sits at x = 0.2.
      REQUIRE(p.space->nodes[40].x == Approx(0.2));
      const double u = r.primal[40];
      CHECK(u <= last + 1e-10);
      last = u;

      for (std::size_t v = 0; v < r.latent.size(); ++v) {
        if (p.space->boundary[v]) continue;
        CHECK(r.latent[v] >= bump_obstacle(p.space->nodes[v].x));
      }
      const Vector slopes = p.extras.at("slopes")(r.state);
      for (std::size_t c = 0; c < slopes.size(); ++c) {
        const double x = p.space->centroids[c].x;
        CHECK(std::abs(slopes[c]) < ((x <= 0.2 || x >= 0.8) ? cap : 100.0));
      }
    }
    CHECK(last < 0.41);  // with phi_c = 2 the ramp from 0 reaches at most 0.4 by x = 0.2
  }

  TEST_CASE("eikonal on the interval") {
    const SaddleProblem p = build_eikonal(64, true);
    const LvppResult r = run_lvpp(p, config(eikonal_schedule(), 1e-4));
    REQUIRE(r.trace.converged);
    double top = 0.0;
    for (std::size_t v = 0; v < r.primal.size(); ++v) {
      const double x = p.space->nodes[v].x;
      top = std::max(top, r.primal[v]);
      CHECK(std::abs(r.primal[v] - distance_to_boundary(0.0, 1.0, x)) < 2.0 / 64.0);
    }
    CHECK(top == Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("multiphase: two-phase relabeling symmetry") {
    MultiphaseData d;
    d.phases = 2;
    d.n = 8;
    auto space = std::make_shared<const P1Space>(make_p1_space(build_tri_mesh(8, Box::unit())));
    const std::size_t nv = space->num_nodes();
    Vector a(2 * nv), b(2 * nv);
    for (std::size_t v = 0; v < nv; ++v) {
      const Point x = space->nodes[v];
      const double s = 0.5 + 0.4 * std::tanh((x.x - 0.4 + 0.1 * x.y) / 0.1);
      a[v] = s;
      a[nv + v] = 1.0 - s;
      b[v] = 1.0 - s;
      b[nv + v] = s;
    }
    const SaddleProblem pa = build_multiphase_step(d, space, a);
    const SaddleProblem pb = build_multiphase_step(d, space, b);
    LvppConfig cfg = config(AlphaSchedule::constant(1.0), 1e-10);
    const LvppResult ra = run_lvpp(pa, cfg);
    const LvppResult rb = run_lvpp(pb, cfg);
    REQUIRE(ra.trace.converged);
    REQUIRE(rb.trace.converged);
    CHECK(ra.trace.outer_iterations() == rb.trace.outer_iterations());
    for (std::size_t v = 0; v < nv; ++v) {
      CHECK(std::abs(ra.primal[v] - rb.primal[nv + v]) < 1e-10);
      CHECK(std::abs(ra.primal[nv + v] - rb.primal[v]) < 1e-10);
    }
    for (std::size_t v = 0; v < nv; ++v) {
      CHECK(std::abs(ra.latent[v] + ra.latent[nv + v] - 1.0) <= 1e-12);
      CHECK(ra.latent[v] > 0.0);
      CHECK(ra.latent[nv + v] > 0.0);
    }

    Vector off = a;
    off[0] += 0.1;
    CHECK_THROWS_AS(build_multiphase_step(d, space, off), std::invalid_argument);
  }

  TEST_CASE("multiphase: invariants over a few steps") {
    const MultiphaseData d = multiphase_preset(12, 3);
    const MultiphaseRun run = run_multiphase(d, NewtonConfig{}, 1e-5);
    CHECK(run.steps.size() == 3);
    CHECK(run.max_sum_defect <= 1e-12);
    CHECK(run.min_fraction > 0.0);
    // One row before the first step and one after each step, a column per phase.
    REQUIRE(run.phase_mass.size() == 4);
    for (const auto& row : run.phase_mass) {
      REQUIRE(row.size() == 4);
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(row[i] - run.phase_mass.front()[i]) <= 1e-8);
    }
    for (const auto& t : run.steps) {
      CHECK(t.converged);
      for (const auto& it : t.iterations) CHECK(it.min_margin >= -1e-14);
    }
  }

  TEST_CASE("QVI: initial state and preset") {
    const QviData d = qvi_preset(10);
    const SaddleProblem p = build_qvi_thermoforming(d);
    const auto u = p.view(p.initial_state, "u");
    const auto t = p.view(p.initial_state, "T");
    for (double v : u) CHECK(v == 0.0);
    for (double v : t) CHECK(v == 1.0);
    CHECK(d.heat_transfer(-1.0) == 1.0);
    CHECK(d.heat_transfer(0.005) == Approx(0.5));
    CHECK(d.heat_transfer(0.5) == 0.0);
    CHECK(d.force({0.3, 0.7}) == 25.0);
    CHECK(d.initial_mold({0.5, 0.5}) == Approx(1.0));
    CHECK(d.initial_mold({0.0, 0.3}) == Approx(0.0));

    QviData bad = d;
    bad.heat_transfer = PiecewiseLinear({0.0, 1.0}, {0.0, 1.0});
    CHECK_THROWS_AS(build_qvi_thermoforming(bad), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseLinear({1.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
  }

  TEST_CASE("QVI: zero force decouples the temperature") {
    QviData d = qvi_preset(16);
    d.force = constant_field(0.0);
    const SaddleProblem p = build_qvi_thermoforming(d);
    const LvppResult r = run_lvpp(p, config(qvi_schedule(), 1e-8, 40));
    REQUIRE(r.trace.converged);
    for (double v : r.primal) CHECK(std::abs(v) < 1e-8);
    const Vector ref = qvi_temperature_for_membrane(d, Vector(r.primal.size(), 0.0));
    const Vector t = p.extras.at("temperature")(r.state);
    CHECK(max_abs_diff(t, ref) < 1e-8);
  }

  TEST_CASE("distance to the boundary") {
    CHECK(distance_to_boundary(Box::unit(), {0.5, 0.5}) == 0.5);
    CHECK(distance_to_boundary(Box::unit(), {1.0, 0.3}) == 0.0);
    CHECK(distance_to_boundary(Box::unit(), {0.25, 0.5}) == 0.25);
    CHECK(distance_to_boundary(0.0, 1.0, 0.9) == Approx(0.1));
    CHECK_THROWS_AS(distance_to_boundary(Box::unit(), {1.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(distance_to_boundary(0.0, 1.0, -0.1), std::invalid_argument);
  }
}
