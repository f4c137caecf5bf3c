#include "lvpp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lvpp {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_ptr,
                           std::vector<int> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
      static_cast<std::size_t>(row_ptr_.back()) != col_idx_.size() || col_idx_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent compressed-row arrays");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) throw std::invalid_argument("SparseMatrix: row offsets decrease");
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (col_idx_[p] < 0 || static_cast<std::size_t>(col_idx_[p]) >= cols_) {
        throw std::invalid_argument("SparseMatrix: column index out of range");
      }
      if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1]) {
        throw std::invalid_argument("SparseMatrix: column indices not sorted/unique in row " +
                                    std::to_string(i));
      }
    }
  }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  const Vector ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  const std::size_t n = d.size();
  std::vector<int> ptr(n + 1), idx(n);
  std::iota(ptr.begin(), ptr.end(), 0);
  std::iota(idx.begin(), idx.end(), 0);
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), Vector(d.begin(), d.end()));
}

SparseMatrix SparseMatrix::zero(std::size_t rows, std::size_t cols) {
  return SparseMatrix(rows, cols, std::vector<int>(rows + 1, 0), {}, {});
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("SparseMatrix::at");
  const auto begin = col_idx_.begin() + row_ptr_[i];
  const auto end = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, static_cast<int>(j));
  return (it != end && *it == static_cast<int>(j)) ? values_[it - col_idx_.begin()] : 0.0;
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
  Vector y(rows_, 0.0);
  multiply_add(x, y);
  return y;
}

void SparseMatrix::multiply_add(std::span<const double> x, std::span<double> y, double scale) const {
  if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("SparseMatrix: size mismatch in product");
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[i] += scale * s;
  }
}

void SparseMatrix::multiply_transpose_add(std::span<const double> x, std::span<double> y,
                                          double scale) const {
  if (x.size() != rows_ || y.size() != cols_) {
    throw std::invalid_argument("SparseMatrix: size mismatch in transpose product");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    const double xi = scale * x[i];
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) y[col_idx_[p]] += values_[p] * xi;
  }
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<int> ptr(cols_ + 1, 0);
  for (int c : col_idx_) ++ptr[c + 1];
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  std::vector<int> idx(nnz());
  Vector val(nnz());
  std::vector<int> next(ptr.begin(), ptr.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const int dst = next[col_idx_[p]]++;
      idx[dst] = static_cast<int>(i);
      val[dst] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::scaled(double s) const {
  SparseMatrix out = *this;
  for (double& v : out.values_) v *= s;
  return out;
}

SparseMatrix SparseMatrix::scale_rows(std::span<const double> d) const {
  if (d.size() != rows_) throw std::invalid_argument("SparseMatrix::scale_rows: size mismatch");
  SparseMatrix out = *this;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out.values_[p] *= d[i];
  }
  return out;
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("SparseMatrix: size mismatch in matrix product");
  std::vector<int> ptr{0}, idx;
  Vector val;
  Vector acc(rhs.cols_, 0.0);
  std::vector<int> marker(rhs.cols_, -1);
  std::vector<int> pattern;
  for (std::size_t i = 0; i < rows_; ++i) {
    pattern.clear();
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const int k = col_idx_[p];
      const double a = values_[p];
      for (int q = rhs.row_ptr_[k]; q < rhs.row_ptr_[k + 1]; ++q) {
        const int j = rhs.col_idx_[q];
        if (marker[j] != static_cast<int>(i)) {
          marker[j] = static_cast<int>(i);
          pattern.push_back(j);
          acc[j] = 0.0;
        }
        acc[j] += a * rhs.values_[q];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (int j : pattern) {
      idx.push_back(j);
      val.push_back(acc[j]);
    }
    ptr.push_back(static_cast<int>(idx.size()));
  }
  return SparseMatrix(rows_, rhs.cols_, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::submatrix(std::span<const int> row_ids, std::span<const int> col_ids) const {
  std::vector<int> col_map(cols_, -1);
  for (std::size_t c = 0; c < col_ids.size(); ++c) {
    if (col_ids[c] < 0 || static_cast<std::size_t>(col_ids[c]) >= cols_) {
      throw std::out_of_range("SparseMatrix::submatrix: column id");
    }
    col_map[col_ids[c]] = static_cast<int>(c);
  }
  std::vector<int> ptr{0}, idx;
  Vector val;
  std::vector<std::pair<int, double>> row;
  for (int r : row_ids) {
    if (r < 0 || static_cast<std::size_t>(r) >= rows_) throw std::out_of_range("SparseMatrix::submatrix: row id");
    row.clear();
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const int c = col_map[col_idx_[p]];
      if (c >= 0) row.emplace_back(c, values_[p]);
    }
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      idx.push_back(c);
      val.push_back(v);
    }
    ptr.push_back(static_cast<int>(idx.size()));
  }
  return SparseMatrix(row_ids.size(), col_ids.size(), std::move(ptr), std::move(idx), std::move(val));
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

Vector SparseMatrix::row_sums() const {
  Vector s(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s[i] += values_[p];
  }
  return s;
}

double SparseMatrix::quadratic_form(std::span<const double> x) const {
  const Vector ax = multiply(x);
  return std::inner_product(ax.begin(), ax.end(), x.begin(), 0.0);
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  TripletBuilder t(a.rows(), a.cols());
  t.reserve(a.nnz() + b.nnz());
  t.add_block(a, 0, 0, alpha);
  t.add_block(b, 0, 0, beta);
  return t.build();
}

double asymmetry(const SparseMatrix& a) {
  const SparseMatrix d = add(a, a.transpose(), 1.0, -1.0);
  double m = 0.0;
  for (double v : d.values()) m = std::max(m, std::abs(v));
  return m;
}

void TripletBuilder::reserve(std::size_t n) { entries_.reserve(n); }

void TripletBuilder::add(std::size_t i, std::size_t j, double v) {
  if (i >= rows_ || j >= cols_) {
    throw std::out_of_range("TripletBuilder: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  entries_.push_back({static_cast<int>(i), static_cast<int>(j), v});
}

void TripletBuilder::add_block(const SparseMatrix& block, std::size_t row_offset, std::size_t col_offset,
                               double scale) {
  if (row_offset + block.rows() > rows_ || col_offset + block.cols() > cols_) {
    throw std::out_of_range("TripletBuilder: block does not fit");
  }
  const auto& ptr = block.row_ptr();
  const auto& idx = block.col_idx();
  const auto& val = block.values();
  for (std::size_t i = 0; i < block.rows(); ++i) {
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
      entries_.push_back({static_cast<int>(row_offset + i), static_cast<int>(col_offset + idx[p]), scale * val[p]});
    }
  }
}

void TripletBuilder::add_diagonal(std::size_t offset, std::span<const double> d) {
  for (std::size_t i = 0; i < d.size(); ++i) add(offset + i, offset + i, d[i]);
}

SparseMatrix TripletBuilder::build() const {
  // Counting sort by row, then sort each row by column and merge duplicates.
  std::vector<int> count(rows_ + 1, 0);
  for (const auto& e : entries_) ++count[e.row + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::pair<int, double>> sorted(entries_.size());
  std::vector<int> next(count.begin(), count.end() - 1);
  for (const auto& e : entries_) sorted[next[e.row]++] = {e.col, e.value};

  std::vector<int> ptr{0}, idx;
  Vector val;
  idx.reserve(entries_.size());
  val.reserve(entries_.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    auto begin = sorted.begin() + count[i];
    auto end = sorted.begin() + count[i + 1];
    std::sort(begin, end, [](const auto& l, const auto& r) { return l.first < r.first; });
    for (auto it = begin; it != end; ++it) {
      if (!idx.empty() && static_cast<int>(idx.size()) > ptr.back() && idx.back() == it->first) {
        val.back() += it->second;
      } else {
        idx.push_back(it->first);
        val.push_back(it->second);
      }
    }
    ptr.push_back(static_cast<int>(idx.size()));
  }
  return SparseMatrix(rows_, cols_, std::move(ptr), std::move(idx), std::move(val));
}

}  // namespace lvpp
