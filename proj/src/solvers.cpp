#include "lvpp/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lvpp/error.hpp"

namespace lvpp {

struct SparseLU::Impl {
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> a;
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
};

SparseLU::SparseLU(const SparseMatrix& a) : n_(a.rows()), impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SparseLU: matrix must be square");
  if (n_ == 0) return;
  const auto n = static_cast<Eigen::Index>(n_);
  // A row-major view of the CSR arrays, copied to column-major storage.
  const Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view(
      n, n, static_cast<Eigen::Index>(a.nnz()), a.row_ptr().data(), a.col_idx().data(), a.values().data());
  impl_->a = view;
  impl_->a.makeCompressed();
  impl_->lu.analyzePattern(impl_->a);
  impl_->lu.factorize(impl_->a);
  if (impl_->lu.info() != Eigen::Success) {
    throw SingularMatrixError("sparse LU: matrix is singular to working precision (" + impl_->lu.lastErrorMessage() +
                              ")");
  }
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU&&) noexcept = default;
SparseLU& SparseLU::operator=(SparseLU&&) noexcept = default;

Vector SparseLU::solve(std::span<const double> b) const {
  if (b.size() != n_) throw std::invalid_argument("SparseLU::solve: right-hand side has wrong length");
  Vector x(n_, 0.0);
  if (n_ == 0) return x;
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
  Eigen::Map<Eigen::VectorXd> out(x.data(), n);
  out = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !out.allFinite()) {
    throw SingularMatrixError("sparse LU: solve failed");
  }
  return x;
}

Vector solve_sparse(const SparseMatrix& a, std::span<const double> b) {
  if (a.rows() != b.size()) throw std::invalid_argument("solve_sparse: right-hand side has wrong length");
  return SparseLU(a).solve(b);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double t : v) s += t * t;
  return std::sqrt(s);
}

NewtonResult newton_solve(const NonlinearSystem& system, Vector x0, const NewtonConfig& cfg) {
  if (!(cfg.tolerance > 0.0) || cfg.max_iterations < 1 || cfg.max_halvings < 0) {
    throw std::invalid_argument("newton_solve: invalid configuration");
  }
  NewtonResult out{std::move(x0), {}};
  auto& x = out.x;
  auto& rep = out.report;

  Vector r = system.residual(x);
  double rnorm = norm2(r);
  if (!std::isfinite(rnorm)) throw DivergenceError("newton: non-finite initial residual", 0);
  rep.residual_history.push_back(rnorm);

  while (rnorm > cfg.tolerance && rep.iterations < cfg.max_iterations) {
    const std::size_t it = static_cast<std::size_t>(rep.iterations) + 1;
    Vector rhs(r.size());
    std::transform(r.begin(), r.end(), rhs.begin(), [](double t) { return -t; });
    Vector step;
    try {
      const SparseMatrix jac = system.jacobian(x);
      step = system.linear_solver ? system.linear_solver(jac, rhs) : solve_sparse(jac, rhs);
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError(std::string(e.what()) + " (Newton iteration " + std::to_string(it) + ")");
    }
    ++rep.linear_solves;

    const double s0 = system.step_limit ? std::clamp(system.step_limit(x, step), 0.0, 1.0) : 1.0;
    if (!(s0 > 0.0)) throw DivergenceError("newton: step limit rejected the correction", it);
    double s = s0;
    Vector trial(x.size());
    Vector r_trial;
    double trial_norm = 0.0;
    const int halvings = cfg.damping ? cfg.max_halvings : 0;
    bool accepted = false;
    for (int h = 0; h <= halvings; ++h) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + s * step[i];
      r_trial = system.residual(trial);
      trial_norm = norm2(r_trial);
      if (std::isfinite(trial_norm) && trial_norm < rnorm) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted && halvings > 0) {
      // Halvings exhausted: take the undamped (limited) step.
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + s0 * step[i];
      r_trial = system.residual(trial);
      trial_norm = norm2(r_trial);
    }
    if (!std::isfinite(trial_norm)) throw DivergenceError("newton: non-finite residual", it);

    x.swap(trial);
    r.swap(r_trial);
    rnorm = trial_norm;
    ++rep.iterations;
    rep.residual_history.push_back(rnorm);
  }
  rep.converged = rnorm <= cfg.tolerance;
  rep.residual_norm = rnorm;
  return out;
}

Vector solve_condensed(const SparseMatrix& jac, std::span<const double> rhs,
                       const std::vector<std::vector<int>>& local_blocks) {
  const std::size_t n = jac.rows();
  if (jac.cols() != n || rhs.size() != n) throw std::invalid_argument("solve_condensed: size mismatch");

  std::vector<int> block_of(n, -1);
  std::vector<int> local_ids;
  for (std::size_t b = 0; b < local_blocks.size(); ++b) {
    for (int i : local_blocks[b]) {
      if (i < 0 || static_cast<std::size_t>(i) >= n || block_of[i] != -1) {
        throw std::invalid_argument("solve_condensed: invalid or repeated local index");
      }
      block_of[i] = static_cast<int>(b);
      local_ids.push_back(i);
    }
  }
  std::vector<int> global_ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (block_of[i] < 0) global_ids.push_back(static_cast<int>(i));
  }

  // Invert each local diagonal block.
  std::vector<int> local_pos(n, -1);
  for (std::size_t k = 0; k < local_ids.size(); ++k) local_pos[local_ids[k]] = static_cast<int>(k);
  const auto& ptr = jac.row_ptr();
  const auto& idx = jac.col_idx();
  const auto& val = jac.values();
  TripletBuilder dinv(local_ids.size(), local_ids.size());
  std::size_t offset = 0;
  for (std::size_t b = 0; b < local_blocks.size(); ++b) {
    const auto& blk = local_blocks[b];
    const auto m = static_cast<Eigen::Index>(blk.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const int row = blk[r];
      for (int p = ptr[row]; p < ptr[row + 1]; ++p) {
        const int col = idx[p];
        if (block_of[col] < 0) continue;
        if (block_of[col] != static_cast<int>(b)) {
          throw std::invalid_argument("solve_condensed: local blocks are coupled");
        }
        d(r, local_pos[col] - static_cast<int>(offset)) = val[p];
      }
    }
    // Local blocks can be badly scaled (saturated latent maps), so only an
    // exact breakdown counts as singular.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
    lu.setThreshold(std::numeric_limits<double>::min());
    const Eigen::MatrixXd inv = lu.inverse();
    if (!lu.isInvertible() || !inv.allFinite()) throw SingularMatrixError("solve_condensed: singular local block");
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) dinv.add(offset + r, offset + c, inv(r, c));
    }
    offset += blk.size();
  }
  const SparseMatrix d_inv = dinv.build();

  const SparseMatrix a = jac.submatrix(global_ids, global_ids);
  const SparseMatrix bmat = jac.submatrix(global_ids, local_ids);
  const SparseMatrix cmat = jac.submatrix(local_ids, global_ids);
  const SparseMatrix dinv_c = d_inv.multiply(cmat);
  const SparseMatrix schur = add(a, bmat.multiply(dinv_c), 1.0, -1.0);

  Vector rg(global_ids.size()), rl(local_ids.size());
  for (std::size_t k = 0; k < global_ids.size(); ++k) rg[k] = rhs[global_ids[k]];
  for (std::size_t k = 0; k < local_ids.size(); ++k) rl[k] = rhs[local_ids[k]];
  const Vector dinv_rl = d_inv.multiply(rl);
  bmat.multiply_add(dinv_rl, rg, -1.0);

  const Vector xg = solve_sparse(schur, rg);
  cmat.multiply_add(xg, rl, -1.0);
  const Vector xl = d_inv.multiply(rl);

  Vector x(n);
  for (std::size_t k = 0; k < global_ids.size(); ++k) x[global_ids[k]] = xg[k];
  for (std::size_t k = 0; k < local_ids.size(); ++k) x[local_ids[k]] = xl[k];
  return x;
}

}  // namespace lvpp
