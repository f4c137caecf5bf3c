#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lvpp/lvpp.hpp"
#include "lvpp/types.hpp"

namespace lvpp {

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  DenseMatrix(std::size_t r, std::size_t c, Vector v);

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }

  static DenseMatrix identity(std::size_t n);
  Vector multiply(std::span<const double> x) const;
  Vector multiply_transpose(std::span<const double> y) const;
};

/// Reads consecutive dense matrices, each written as a line "rows cols"
/// followed by rows * cols whitespace-separated entries in row-major order.
/// Throws std::runtime_error on malformed input.
std::vector<DenseMatrix> read_dense_matrices(std::istream& in);
std::vector<DenseMatrix> read_dense_matrices_file(const std::string& path);

/// min 1/2 u^T A u - F^T u subject to B u = 0.
struct EqualityProblem {
  DenseMatrix a;  ///< symmetric positive definite, n x n
  DenseMatrix b;  ///< full row rank, m x n
  Vector f;
  Vector psi0;  ///< empty means zero
  double alpha1 = 1.0;

  std::size_t n() const noexcept { return a.rows; }
  std::size_t m() const noexcept { return b.rows; }
};

/// Builds a problem from the matrices of a file: A, B, F (as n x 1 or 1 x n)
/// and optionally psi^0.
EqualityProblem equality_problem_from_matrices(const std::vector<DenseMatrix>& mats, double alpha1 = 1.0);

/// A = I_2, B = [1 1], F = (1, 0).
EqualityProblem equality_example();

/// Throws std::invalid_argument unless A is symmetric to 1e-12 and positive
/// definite and B has full row rank.
void validate(const EqualityProblem& p);

/// Smallest eigenvalue of A, the coercivity constant.
double coercivity(const EqualityProblem& p);

struct KktSolution {
  Vector u;
  Vector lambda;
};

/// Solves [A B^T; B 0] (u, lambda) = (F, 0).
KktSolution solve_kkt(const EqualityProblem& p);

struct RegularizedSolution {
  Vector u;
  Vector psi;
  NewtonReport report;
};

/// Newton solve of
///   alpha1 A u + B^T psi = alpha1 F + B^T psi^0,
///   B u = eps psi / sqrt(1 + |psi|^2),
/// with the Hellinger map applied to psi as one m-vector. Requires 0 < eps < 1.
RegularizedSolution solve_regularized(const EqualityProblem& p, double eps, const NewtonConfig& newton = {});

/// The regularized problem as an LVPP iteration with constant alpha = alpha1.
/// Layout "u" (n), "psi" (m); starts from (0, psi^0). Latent recovery is
/// eps psi / sqrt(1 + |psi|^2), the value that B u is tied to.
SaddleProblem build_equality_problem(const EqualityProblem& p, double eps);

struct EqualitySweepRow {
  double eps = 0.0;
  double error = 0.0;             ///< |u_eps - u_kkt|
  double multiplier_error = 0.0;  ///< |(psi_eps - psi^0) / alpha1 - lambda|
  double constraint = 0.0;        ///< |B u_eps|
  double bound_lhs = 0.0;         ///< beta |u_eps|
  double bound_rhs = 0.0;         ///< |F| + |B^T psi^0| / alpha1
  double monotonicity = 0.0;      ///< psi . B u_eps, nonnegative
  int newton_iterations = 0;
};

std::vector<EqualitySweepRow> equality_eps_sweep(const EqualityProblem& p, std::span<const double> eps_values);

/// eps values hi, hi / 10, ... down to lo (inclusive), for hi > lo > 0.
std::vector<double> decade_sweep(double hi, double lo);

}  // namespace lvpp
