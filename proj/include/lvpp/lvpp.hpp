#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lvpp/schedule.hpp"
#include "lvpp/solvers.hpp"
#include "lvpp/sparse.hpp"

namespace lvpp {

struct Grid2D;
struct P1Space;

/// A named contiguous slice of the stacked unknown vector.
struct FieldBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// One discrete proximal subproblem family. For a given alpha_k and the
/// previous outer iterate, residual/jacobian describe the saddle-point
/// system whose root is the next iterate.
struct SaddleProblem {
  using StateFn = std::function<Vector(std::span<const double> state)>;

  std::string name;
  std::size_t size = 0;
  std::vector<FieldBlock> layout;

  /// Starting iterate; empty means all zeros.
  Vector initial_state;

  std::function<Vector(std::span<const double> state, double alpha, std::span<const double> prev)> residual;
  std::function<SparseMatrix(std::span<const double> state, double alpha, std::span<const double> prev)> jacobian;

  /// Primal field u (nodal, boundary values included where applicable).
  StateFn primal;
  /// Feasible field grad R*(psi).
  StateFn latent_recovery;
  /// Problem-specific norm of the primal increment between two iterates.
  std::function<double(std::span<const double> state, std::span<const double> prev)> increment_norm;
  /// Smallest slack of the latent recovery to the boundary of C.
  std::function<double(std::span<const double> state)> feasibility_margin;

  /// When non-empty, Newton corrections eliminate these unknown blocks
  /// before factorizing (see solve_condensed).
  std::vector<std::vector<int>> condensed_blocks;

  /// Optional Newton step limit (see NonlinearSystem::step_limit).
  std::function<double(std::span<const double> state, std::span<const double> step)> step_limit;

  /// Discretization the fields live on: an FD grid or a P1 space.
  std::shared_ptr<const Grid2D> grid;
  std::shared_ptr<const P1Space> space;
  /// Further derived fields by name (e.g. "mold", "slopes").
  std::map<std::string, StateFn, std::less<>> extras;

  const FieldBlock& block(std::string_view block_name) const;
  std::span<const double> view(std::span<const double> state, std::string_view block_name) const;
};

struct LvppIterate {
  int k = 0;
  double alpha = 0.0;
  int newton_iterations = 0;
  int linear_solves = 0;
  double increment_norm = 0.0;
  double min_margin = 0.0;
};

struct LvppTrace {
  std::vector<LvppIterate> iterations;
  int total_newton_iterations = 0;
  int total_linear_solves = 0;
  bool converged = false;

  int outer_iterations() const noexcept { return static_cast<int>(iterations.size()); }
};

struct LvppConfig {
  AlphaSchedule schedule = AlphaSchedule::constant(1.0);
  double tolerance = 1e-8;
  int max_iterations = 100;
  NewtonConfig newton;
  /// Called after every outer iteration with the new iterate.
  std::function<void(const LvppIterate&, std::span<const double> state)> observer;
};

struct LvppResult {
  Vector state;
  Vector primal;
  Vector latent;
  LvppTrace trace;
};

/// Newton failure inside the outer loop; carries the iterations completed
/// before the failure.
class LvppError : public std::runtime_error {
 public:
  LvppError(const std::string& what, LvppTrace partial) : std::runtime_error(what), trace_(std::move(partial)) {}
  const LvppTrace& trace() const noexcept { return trace_; }

 private:
  LvppTrace trace_;
};

/// Iterates the proximal subproblems k = 1, 2, ... warm-starting each Newton
/// solve at the previous iterate, until the increment norm drops to the
/// tolerance or max_iterations is reached.
LvppResult run_lvpp(const SaddleProblem& problem, LvppConfig cfg);

}  // namespace lvpp
