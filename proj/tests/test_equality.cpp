#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lvpp/equality.hpp"

using namespace lvpp;
using doctest::Approx;

namespace {

// For A = I_2, B = [1 1], F = (1, 0), psi^0 = 0, alpha1 = 1 the regularized
// system reduces to u = (1 - psi, -psi) with 1 - 2 psi = eps psi / sqrt(1 + psi^2).
// The left side minus the right is decreasing in psi; bisect on [0, 1].
double example_psi(double eps) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = 1.0 - 2.0 * mid - eps * mid / std::sqrt(1.0 + mid * mid);
    (g > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("equality") {
  TEST_CASE("KKT solutions") {
    const EqualityProblem p = equality_example();
    const KktSolution s = solve_kkt(p);
    CHECK(s.u[0] == Approx(0.5));
    CHECK(s.u[1] == Approx(-0.5));
    CHECK(s.lambda[0] == Approx(0.5));

    EqualityProblem zero = p;
    zero.f = Vector{0.0, 0.0};
    const KktSolution z = solve_kkt(zero);
    CHECK(std::abs(z.u[0]) < 1e-15);
    CHECK(std::abs(z.u[1]) < 1e-15);
    CHECK(std::abs(z.lambda[0]) < 1e-15);

    // Square invertible B forces u = 0 and B^T lambda = F.
    EqualityProblem sq = p;
    sq.b = DenseMatrix(2, 2, Vector{1, 2, 3, 4});
    sq.f = Vector{1.0, 1.0};
    const KktSolution q = solve_kkt(sq);
    CHECK(std::abs(q.u[0]) < 1e-14);
    CHECK(std::abs(q.u[1]) < 1e-14);
    CHECK(q.lambda[0] == Approx(-0.5));
    CHECK(q.lambda[1] == Approx(0.5));
  }

  TEST_CASE("validation") {
    EqualityProblem p = equality_example();
    CHECK_NOTHROW(validate(p));
    CHECK(coercivity(p) == Approx(1.0));
    p.b = DenseMatrix(2, 2, Vector{1, 1, 2, 2});
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    CHECK_THROWS_AS(solve_kkt(p), std::invalid_argument);
    p = equality_example();
    p.a = DenseMatrix(2, 2, Vector{1, 0.5, 0, 1});
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p.a = DenseMatrix(2, 2, Vector{1, 2, 2, 1});
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    CHECK_THROWS_AS(solve_regularized(equality_example(), 1.5), std::invalid_argument);
  }

  TEST_CASE("regularized solutions against the scalar reduction") {
    const EqualityProblem p = equality_example();
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      const RegularizedSolution r = solve_regularized(p, eps);
      const double psi = example_psi(eps);
      CHECK(r.report.converged);
      CHECK(r.psi[0] == Approx(psi).epsilon(1e-9));
      CHECK(r.u[0] == Approx(1.0 - psi).epsilon(1e-9));
      CHECK(r.u[1] == Approx(-psi).epsilon(1e-9));
    }
    const RegularizedSolution r = solve_regularized(p, 1e-4);
    CHECK(dist(r.u, Vector{0.5, -0.5}) <= 1e-3);
    CHECK(std::abs(r.psi[0] - 0.5) <= 1e-4);
  }

  TEST_CASE("sweep bounds and monotone error") {
    EqualityProblem p;
    p.a = DenseMatrix(3, 3, Vector{3, 1, 0, 1, 2, 0.5, 0, 0.5, 1});
    p.b = DenseMatrix(2, 3, Vector{1, -1, 0, 0, 1, 1});
    p.f = Vector{1.0, 2.0, -1.0};
    p.psi0 = Vector{0.2, -0.4};
    p.alpha1 = 2.0;
    for (const EqualityProblem& q : {equality_example(), p}) {
      const auto rows = equality_eps_sweep(q, decade_sweep(1e-1, 1e-6));
      REQUIRE(rows.size() == 6);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].constraint <= rows[i].eps);
        CHECK(rows[i].bound_lhs <= rows[i].bound_rhs);
        CHECK(rows[i].monotonicity >= 0.0);
        if (i > 0) {
          CHECK(rows[i].error < rows[i - 1].error);
          CHECK(rows[i].multiplier_error < rows[i - 1].multiplier_error);
        }
      }
      // Error is O(eps) in finite dimensions.
      for (const auto& r : rows) CHECK(r.error <= 10.0 * r.eps);
    }
  }

  TEST_CASE("decade sweep") {
    const auto e = decade_sweep(1e-1, 1e-6);
    REQUIRE(e.size() == 6);
    CHECK(e.front() == Approx(1e-1));
    CHECK(e.back() == Approx(1e-6));
    CHECK_THROWS_AS(decade_sweep(1e-6, 1e-1), std::invalid_argument);
  }

  TEST_CASE("one outer iteration reaches the constrained minimizer") {
    const EqualityProblem p = equality_example();
    const KktSolution kkt = solve_kkt(p);
    const double eps = 1e-6;
    const SaddleProblem sp = build_equality_problem(p, eps);
    LvppConfig cfg;
    cfg.schedule = AlphaSchedule::constant(p.alpha1);
    cfg.max_iterations = 50;
    cfg.tolerance = 1e-12;
    int stop_at = 0;
    cfg.observer = [&](const LvppIterate& it, std::span<const double> s) {
      if (stop_at == 0 && dist(sp.primal(s), kkt.u) <= 10.0 * eps) stop_at = it.k;
    };
    run_lvpp(sp, cfg);
    CHECK(stop_at == 1);
  }

  TEST_CASE("matrix file reader") {
    std::istringstream in("2 2\n1 0\n0 1\n1 2\n1 1\n2 1\n1 0\n");
    const auto mats = read_dense_matrices(in);
    REQUIRE(mats.size() == 3);
    CHECK(mats[1].rows == 1);
    CHECK(mats[1].cols == 2);
    const EqualityProblem p = equality_problem_from_matrices(mats);
    CHECK(p.f[0] == 1.0);
    CHECK(p.f[1] == 0.0);
    CHECK(solve_kkt(p).lambda[0] == Approx(0.5));

    std::istringstream row_f("2 2 1 0 0 1\n1 2 1 1\n1 2 1 0\n1 1 0.25\n");
    const EqualityProblem q = equality_problem_from_matrices(read_dense_matrices(row_f));
    REQUIRE(q.psi0.size() == 1);
    CHECK(q.psi0[0] == 0.25);

    std::istringstream truncated("2 2\n1 0 0\n");
    CHECK_THROWS(read_dense_matrices(truncated));
    std::istringstream junk("1 1\n2\nabc\n");
    CHECK_THROWS(read_dense_matrices(junk));
    std::istringstream two("1 1 1\n1 1 1\n");
    CHECK_THROWS_AS(equality_problem_from_matrices(read_dense_matrices(two)), std::invalid_argument);
    CHECK_THROWS(read_dense_matrices_file("/nonexistent/matrix.txt"));
  }
}
