#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "lvpp/sparse.hpp"

namespace lvpp {

/// Sparse LU factorization with partial pivoting and a fill-reducing
/// column ordering. Throws SingularMatrixError on a zero pivot.
class SparseLU {
 public:
  explicit SparseLU(const SparseMatrix& a);
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;

  Vector solve(std::span<const double> b) const;
  std::size_t size() const noexcept { return n_; }

 private:
  struct Impl;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

/// Solves A x = b.
Vector solve_sparse(const SparseMatrix& a, std::span<const double> b);

/// Euclidean norm.
double norm2(std::span<const double> v);

struct NewtonConfig {
  double tolerance = 1e-8;  ///< absolute, on the l2 norm of the residual
  int max_iterations = 50;
  int max_halvings = 20;
  bool damping = true;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  int linear_solves = 0;
  double residual_norm = 0.0;
  std::vector<double> residual_history;  ///< norm before the first step, then after each step
};

/// Residual / Jacobian callbacks of a square nonlinear system F(x) = 0.
/// The optional linear_solver replaces solve_sparse(J, rhs) for the Newton
/// correction, e.g. to eliminate blocks before factorizing.
struct NonlinearSystem {
  std::function<Vector(std::span<const double>)> residual;
  std::function<SparseMatrix(std::span<const double>)> jacobian;
  std::function<Vector(const SparseMatrix&, std::span<const double>)> linear_solver;
  /// Optional largest admissible step length in (0, 1] for a correction,
  /// applied before backtracking.
  std::function<double(std::span<const double> x, std::span<const double> step)> step_limit;
};

struct NewtonResult {
  Vector x;
  NewtonReport report;
};

/// Damped Newton: x <- x + s d with J d = -F(x), s starting at the step limit
/// (1 if none) and halved until the residual norm decreases. If the halvings
/// run out, the step at the limit is taken. Throws DivergenceError on a non-finite residual and
/// rethrows a singular Jacobian as SingularMatrixError naming the iteration.
NewtonResult newton_solve(const NonlinearSystem& system, Vector x0, const NewtonConfig& cfg = {});

/// Solves J d = rhs where the unknowns listed in local_blocks form small
/// independent diagonal blocks of J (each block couples only to itself
/// among local unknowns). Those are eliminated, the Schur complement on the
/// remaining unknowns is factorized, and the local part is recovered. Rows
/// and columns share the same index partition.
Vector solve_condensed(const SparseMatrix& jac, std::span<const double> rhs,
                       const std::vector<std::vector<int>>& local_blocks);

}  // namespace lvpp
