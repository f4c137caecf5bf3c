#include "lvpp/equality.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "lvpp/entropy.hpp"
#include "lvpp/error.hpp"

namespace lvpp {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_eigen(const DenseMatrix& m) {
  return {m.values.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

Vector psi0_of(const EqualityProblem& p) { return p.psi0.empty() ? Vector(p.m(), 0.0) : p.psi0; }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// The regularized system in x = (u, psi) for proximal parameter alpha and
// previous latent psi_prev.
struct RegularizedCore {
  EqualityProblem p;
  LegendreMap map;
  double eps;

  Vector residual(std::span<const double> x, double alpha, std::span<const double> psi_prev) const {
    const std::size_t n = p.n(), m = p.m();
    const auto u = x.first(n);
    const auto psi = x.subspan(n, m);
    Vector r(n + m, 0.0);
    const Vector au = p.a.multiply(u);
    Vector dpsi(m);
    for (std::size_t j = 0; j < m; ++j) dpsi[j] = psi[j] - psi_prev[j];
    const Vector btp = p.b.multiply_transpose(dpsi);
    for (std::size_t i = 0; i < n; ++i) r[i] = alpha * (au[i] - p.f[i]) + btp[i];
    const Vector bu = p.b.multiply(u);
    const Vector h = map.inverse_gradient(Point{}, psi);
    for (std::size_t j = 0; j < m; ++j) r[n + j] = bu[j] - h[j];
    return r;
  }

  SparseMatrix jacobian(std::span<const double> x, double alpha) const {
    const std::size_t n = p.n(), m = p.m();
    const Vector dh = map.inverse_gradient_jacobian(Point{}, x.subspan(n, m));
    TripletBuilder t(n + m, n + m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (p.a(i, j) != 0.0) t.add(i, j, alpha * p.a(i, j));
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        if (p.b(r, i) == 0.0) continue;
        t.add(i, n + r, p.b(r, i));
        t.add(n + r, i, p.b(r, i));
      }
      for (std::size_t c = 0; c < m; ++c) t.add(n + r, n + c, -dh[r * m + c]);
    }
    return t.build();
  }
};

std::shared_ptr<const RegularizedCore> make_core(const EqualityProblem& p, double eps) {
  validate(p);
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("equality: eps must lie in (0, 1)");
  auto core = std::make_shared<RegularizedCore>(
      RegularizedCore{p, LegendreMap::hellinger(constant_field(eps), static_cast<int>(p.m())), eps});
  core->p.psi0 = psi0_of(p);
  return core;
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t r, std::size_t c, Vector v) : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != r * c) throw std::invalid_argument("DenseMatrix: entry count does not match shape");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector DenseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols) throw std::invalid_argument("DenseMatrix::multiply: size mismatch");
  Vector y(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) y[i] += (*this)(i, j) * x[j];
  }
  return y;
}

Vector DenseMatrix::multiply_transpose(std::span<const double> y) const {
  if (y.size() != rows) throw std::invalid_argument("DenseMatrix::multiply_transpose: size mismatch");
  Vector x(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) x[j] += (*this)(i, j) * y[i];
  }
  return x;
}

std::vector<DenseMatrix> read_dense_matrices(std::istream& in) {
  std::vector<DenseMatrix> out;
  long long rows = 0, cols = 0;
  while (in >> rows) {
    if (!(in >> cols) || rows < 1 || cols < 1) throw std::runtime_error("dense matrix: bad shape line");
    DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (double& v : m.values) {
      if (!(in >> v)) throw std::runtime_error("dense matrix: expected " + std::to_string(rows * cols) + " entries");
    }
    out.push_back(std::move(m));
  }
  if (!in.eof()) throw std::runtime_error("dense matrix: unreadable token");
  if (out.empty()) throw std::runtime_error("dense matrix: no matrix found");
  return out;
}

std::vector<DenseMatrix> read_dense_matrices_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
  return read_dense_matrices(in);
}

EqualityProblem equality_problem_from_matrices(const std::vector<DenseMatrix>& mats, double alpha1) {
  if (mats.size() < 3 || mats.size() > 4) {
    throw std::invalid_argument("equality: expected the matrices A, B, F and optionally psi0");
  }
  auto as_vector = [](const DenseMatrix& m, const char* what) {
    if (m.rows != 1 && m.cols != 1) throw std::invalid_argument(std::string("equality: ") + what + " must be a vector");
    return m.values;
  };
  EqualityProblem p;
  p.a = mats[0];
  p.b = mats[1];
  p.f = as_vector(mats[2], "F");
  if (mats.size() == 4) p.psi0 = as_vector(mats[3], "psi0");
  p.alpha1 = alpha1;
  validate(p);
  return p;
}

EqualityProblem equality_example() {
  EqualityProblem p;
  p.a = DenseMatrix::identity(2);
  p.b = DenseMatrix(1, 2, {1.0, 1.0});
  p.f = {1.0, 0.0};
  return p;
}

void validate(const EqualityProblem& p) {
  const std::size_t n = p.n(), m = p.m();
  if (n == 0 || p.a.cols != n) throw std::invalid_argument("equality: A must be square and nonempty");
  if (m == 0 || p.b.cols != n) throw std::invalid_argument("equality: B must have as many columns as A");
  if (p.f.size() != n) throw std::invalid_argument("equality: F has the wrong length");
  if (!p.psi0.empty() && p.psi0.size() != m) throw std::invalid_argument("equality: psi0 has the wrong length");
  if (!(p.alpha1 > 0.0)) throw std::invalid_argument("equality: alpha1 must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(p.a(i, j) - p.a(j, i)) > 1e-12) throw std::invalid_argument("equality: A is not symmetric");
    }
  }
  if (!(coercivity(p) > 0.0)) throw std::invalid_argument("equality: A is not positive definite");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as_eigen(p.b).transpose());
  if (m > n || qr.rank() < static_cast<Eigen::Index>(m)) {
    throw std::invalid_argument("equality: B does not have full row rank");
  }
}

double coercivity(const EqualityProblem& p) {
  const Eigen::MatrixXd a = as_eigen(p.a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

KktSolution solve_kkt(const EqualityProblem& p) {
  validate(p);
  const auto n = static_cast<Eigen::Index>(p.n()), m = static_cast<Eigen::Index>(p.m());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + m, n + m);
  k.topLeftCorner(n, n) = as_eigen(p.a);
  k.topRightCorner(n, m) = as_eigen(p.b).transpose();
  k.bottomLeftCorner(m, n) = as_eigen(p.b);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = p.f[i];
  const Eigen::VectorXd x = k.partialPivLu().solve(rhs);
  KktSolution s;
  s.u.assign(x.data(), x.data() + n);
  s.lambda.assign(x.data() + n, x.data() + n + m);
  return s;
}

RegularizedSolution solve_regularized(const EqualityProblem& p, double eps, const NewtonConfig& newton) {
  const auto core = make_core(p, eps);
  const std::size_t n = p.n();
  const double alpha = p.alpha1;
  const Vector& psi0 = core->p.psi0;
  NonlinearSystem system;
  system.residual = [&](std::span<const double> x) { return core->residual(x, alpha, psi0); };
  system.jacobian = [&](std::span<const double> x) { return core->jacobian(x, alpha); };
  Vector x0(n + p.m(), 0.0);
  std::copy(psi0.begin(), psi0.end(), x0.begin() + static_cast<std::ptrdiff_t>(n));
  NewtonResult r = newton_solve(system, std::move(x0), newton);
  if (!r.report.converged) throw DivergenceError("equality: Newton did not converge", r.report.iterations);
  RegularizedSolution s;
  s.u.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(n));
  s.psi.assign(r.x.begin() + static_cast<std::ptrdiff_t>(n), r.x.end());
  s.report = std::move(r.report);
  return s;
}

SaddleProblem build_equality_problem(const EqualityProblem& p, double eps) {
  const auto core = make_core(p, eps);
  const std::size_t n = p.n(), m = p.m();
  SaddleProblem sp;
  sp.name = "equality";
  sp.size = n + m;
  sp.layout = {{"u", 0, n}, {"psi", n, m}};
  sp.initial_state.assign(n + m, 0.0);
  std::copy(core->p.psi0.begin(), core->p.psi0.end(), sp.initial_state.begin() + static_cast<std::ptrdiff_t>(n));
  sp.residual = [core, n, m](std::span<const double> x, double alpha, std::span<const double> prev) {
    return core->residual(x, alpha, prev.subspan(n, m));
  };
  sp.jacobian = [core](std::span<const double> x, double alpha, std::span<const double>) {
    return core->jacobian(x, alpha);
  };
  sp.primal = [n](std::span<const double> x) { return Vector(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)); };
  sp.latent_recovery = [core, n, m](std::span<const double> x) {
    return core->map.inverse_gradient(Point{}, x.subspan(n, m));
  };
  sp.increment_norm = [n](std::span<const double> x, std::span<const double> prev) {
    return distance(x.first(n), prev.first(n));
  };
  sp.feasibility_margin = [core, n, m](std::span<const double> x) {
    return core->map.feasibility_margin(Point{}, x.subspan(n, m));
  };
  return sp;
}

std::vector<EqualitySweepRow> equality_eps_sweep(const EqualityProblem& p, std::span<const double> eps_values) {
  const KktSolution kkt = solve_kkt(p);
  const Vector psi0 = psi0_of(p);
  const double beta = coercivity(p);
  const double rhs = norm2(p.f) + norm2(p.b.multiply_transpose(psi0)) / p.alpha1;
  std::vector<EqualitySweepRow> rows;
  for (double eps : eps_values) {
    const RegularizedSolution s = solve_regularized(p, eps);
    EqualitySweepRow row;
    row.eps = eps;
    row.error = distance(s.u, kkt.u);
    Vector lam(p.m());
    for (std::size_t j = 0; j < p.m(); ++j) lam[j] = (s.psi[j] - psi0[j]) / p.alpha1;
    row.multiplier_error = distance(lam, kkt.lambda);
    const Vector bu = p.b.multiply(s.u);
    row.constraint = norm2(bu);
    row.bound_lhs = beta * norm2(s.u);
    row.bound_rhs = rhs;
    row.monotonicity = dot(s.psi, bu);
    row.newton_iterations = s.report.iterations;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> decade_sweep(double hi, double lo) {
  if (!(hi > 0.0) || !(lo > 0.0) || lo > hi) throw std::invalid_argument("decade_sweep: need hi >= lo > 0");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = hi * std::pow(10.0, -k);
    if (v < lo * (1.0 - 1e-9)) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace lvpp
