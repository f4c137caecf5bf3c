#include "lvpp/lvpp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "lvpp/error.hpp"

namespace lvpp {

const FieldBlock& SaddleProblem::block(std::string_view block_name) const {
  for (const auto& b : layout) {
    if (b.name == block_name) return b;
  }
  throw std::out_of_range("SaddleProblem '" + name + "' has no block '" + std::string(block_name) + "'");
}

std::span<const double> SaddleProblem::view(std::span<const double> state, std::string_view block_name) const {
  const auto& b = block(block_name);
  return state.subspan(b.offset, b.size);
}

LvppResult run_lvpp(const SaddleProblem& problem, LvppConfig cfg) {
  if (!problem.residual || !problem.jacobian || !problem.increment_norm) {
    throw std::invalid_argument("run_lvpp: problem '" + problem.name + "' is missing callbacks");
  }
  if (!(cfg.tolerance > 0.0) || cfg.max_iterations < 1) {
    throw std::invalid_argument("run_lvpp: invalid outer tolerance or iteration limit");
  }

  Vector state = problem.initial_state.empty() ? Vector(problem.size, 0.0) : problem.initial_state;
  if (state.size() != problem.size) throw std::invalid_argument("run_lvpp: initial state has wrong size");

  LvppTrace trace;
  int prev_newton = 0;
  cfg.schedule.reset();

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    const double alpha = cfg.schedule.next(k, prev_newton);
    const Vector prev = state;

    NonlinearSystem system;
    system.residual = [&](std::span<const double> x) { return problem.residual(x, alpha, prev); };
    system.jacobian = [&](std::span<const double> x) { return problem.jacobian(x, alpha, prev); };
    system.step_limit = problem.step_limit;
    if (!problem.condensed_blocks.empty()) {
      system.linear_solver = [&](const SparseMatrix& jac, std::span<const double> rhs) {
        return solve_condensed(jac, rhs, problem.condensed_blocks);
      };
    }

    NewtonResult sub;
    try {
      sub = newton_solve(system, prev, cfg.newton);
    } catch (const std::exception& e) {
      throw LvppError("lvpp: subproblem k = " + std::to_string(k) + " failed: " + e.what(), trace);
    }
    if (!sub.report.converged) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", sub.report.residual_norm);
      throw LvppError("lvpp: Newton did not converge at k = " + std::to_string(k) + " (residual " + buf + ")",
                      trace);
    }
    state = std::move(sub.x);

    LvppIterate rec;
    rec.k = k;
    rec.alpha = alpha;
    rec.newton_iterations = sub.report.iterations;
    rec.linear_solves = sub.report.linear_solves;
    rec.increment_norm = problem.increment_norm(state, prev);
    rec.min_margin = problem.feasibility_margin ? problem.feasibility_margin(state)
                                                : std::numeric_limits<double>::quiet_NaN();
    trace.iterations.push_back(rec);
    trace.total_newton_iterations += rec.newton_iterations;
    trace.total_linear_solves += rec.linear_solves;
    prev_newton = rec.newton_iterations;
    if (cfg.observer) cfg.observer(rec, state);

    if (rec.increment_norm <= cfg.tolerance) {
      trace.converged = true;
      break;
    }
  }

  LvppResult result;
  result.primal = problem.primal ? problem.primal(state) : Vector{};
  result.latent = problem.latent_recovery ? problem.latent_recovery(state) : Vector{};
  result.state = std::move(state);
  result.trace = std::move(trace);
  return result;
}

}  // namespace lvpp
