#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lvpp/types.hpp"

namespace lvpp {

/// Real sparse matrix in compressed-row form. Column indices are sorted and
/// unique within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_ptr, std::vector<int> col_idx,
               std::vector<double> values);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix diagonal(std::span<const double> d);
  static SparseMatrix zero(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<int>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<int>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Entry (i, j); zero when structurally absent.
  double at(std::size_t i, std::size_t j) const;

  Vector multiply(std::span<const double> x) const;
  /// y += scale * A x
  void multiply_add(std::span<const double> x, std::span<double> y, double scale = 1.0) const;
  /// y += scale * A^T x
  void multiply_transpose_add(std::span<const double> x, std::span<double> y, double scale = 1.0) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double s) const;
  SparseMatrix multiply(const SparseMatrix& rhs) const;
  /// Rows scaled by d: diag(d) A.
  SparseMatrix scale_rows(std::span<const double> d) const;

  /// Submatrix with the listed rows and columns, in the listed order.
  SparseMatrix submatrix(std::span<const int> row_ids, std::span<const int> col_ids) const;

  Vector diagonal() const;
  Vector row_sums() const;

  /// x^T A x
  double quadratic_form(std::span<const double> x) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// alpha A + beta B
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);

/// Maximum absolute entry of A - A^T.
double asymmetry(const SparseMatrix& a);

/// Coordinate-list accumulator. Duplicate entries are summed on build().
class TripletBuilder {
 public:
  TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void reserve(std::size_t n);
  void add(std::size_t i, std::size_t j, double v);
  /// Adds scale * block with its (0, 0) entry placed at (row_offset, col_offset).
  void add_block(const SparseMatrix& block, std::size_t row_offset, std::size_t col_offset,
                 double scale = 1.0);
  void add_diagonal(std::size_t offset, std::span<const double> d);

  SparseMatrix build() const;

 private:
  struct Entry {
    int row;
    int col;
    double value;
  };
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Entry> entries_;
};

}  // namespace lvpp
