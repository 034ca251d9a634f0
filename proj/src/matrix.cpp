#include "epiplan/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "epiplan/errors.hpp"

namespace epiplan {

bool DenseMatrix::column_is_zero(std::size_t c) const {
  for (std::size_t r = 0; r < rows_; ++r) {
    if ((*this)(r, c) != 0.0) return false;
  }
  return true;
}

double DenseMatrix::max_row_sum_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (double v : row(r)) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

CsrMatrix CsrMatrix::from_rows(std::size_t cols, std::vector<std::vector<Entry>> rows) {
  CsrMatrix m(rows.size(), cols);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  m.col_idx_.reserve(total);
  m.values_.reserve(total);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& entries = rows[r];
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (entries[k].col >= cols) throw ContractError("CsrMatrix: column index out of range");
      if (!m.col_idx_.empty() && m.col_idx_.size() > m.row_ptr_[r] && m.col_idx_.back() == entries[k].col) {
        m.values_.back() += entries[k].value;
      } else {
        m.col_idx_.push_back(entries[k].col);
        m.values_.push_back(entries[k].value);
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

CsrMatrix CsrMatrix::from_arrays(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                 std::vector<Index> col_idx, std::vector<double> values) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != col_idx.size() ||
      col_idx.size() != values.size()) {
    throw ContractError("CsrMatrix: inconsistent array sizes");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw ContractError("CsrMatrix: row pointers not monotone");
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col_idx[k] >= cols) throw ContractError("CsrMatrix: column index out of range");
      if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
        throw ContractError("CsrMatrix: columns not strictly increasing within row");
      }
    }
  }
  CsrMatrix m(rows, cols);
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m(n, n);
  m.col_idx_.resize(n);
  m.values_.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.col_idx_[i] = static_cast<Index>(i);
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& dense) {
  CsrMatrix m(dense.rows(), dense.cols());
  for (std::size_t r = 0; r < dense.rows(); ++r) {
    for (std::size_t c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) {
        m.col_idx_.push_back(static_cast<Index>(c));
        m.values_.push_back(dense(r, c));
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(c));
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<double> CsrMatrix::left_multiply(std::span<const double> x) const {
  if (x.size() != rows_) throw ContractError("CsrMatrix::left_multiply: dimension mismatch");
  std::vector<double> y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += xr * values_[k];
  }
  return y;
}

std::vector<double> CsrMatrix::right_multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw ContractError("CsrMatrix::right_multiply: dimension mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
    y[r] = acc;
  }
  return y;
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) = values_[k];
  }
  return d;
}

double CsrMatrix::max_row_sum_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sum += values_[k];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

bool CsrMatrix::all_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw ContractError("multiply: dimension mismatch");
  std::vector<std::vector<CsrMatrix::Entry>> rows(a.rows());
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<CsrMatrix::Index> touched;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    touched.clear();
    auto ac = a.row_cols(r);
    auto av = a.row_values(r);
    for (std::size_t k = 0; k < ac.size(); ++k) {
      auto bc = b.row_cols(ac[k]);
      auto bv = b.row_values(ac[k]);
      for (std::size_t j = 0; j < bc.size(); ++j) {
        if (acc[bc[j]] == 0.0) touched.push_back(bc[j]);
        acc[bc[j]] += av[k] * bv[j];
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (auto c : touched) {
      if (acc[c] != 0.0) rows[r].push_back({c, acc[c]});
      acc[c] = 0.0;
    }
  }
  return CsrMatrix::from_rows(b.cols(), std::move(rows));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace epiplan
