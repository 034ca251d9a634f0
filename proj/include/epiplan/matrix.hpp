#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace epiplan {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// True when every entry of column c is exactly zero.
  bool column_is_zero(std::size_t c) const;

  /// Largest |row sum - 1| over all rows.
  double max_row_sum_error() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Compressed sparse row matrix. Column indices are sorted within each row.
class CsrMatrix {
 public:
  using Index = std::uint32_t;

  struct Entry {
    Index col;
    double value;
  };

  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Builds from per-row entry lists; entries in a row need not be sorted and
  /// duplicate columns are summed.
  static CsrMatrix from_rows(std::size_t cols, std::vector<std::vector<Entry>> rows);

  /// Builds from raw CSR arrays, validating shape and ordering.
  static CsrMatrix from_arrays(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                               std::vector<Index> col_idx, std::vector<double> values);

  static CsrMatrix identity(std::size_t n);
  static CsrMatrix from_dense(const DenseMatrix& dense);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const Index> row_cols(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  /// Entry lookup by binary search; zero when absent.
  double at(std::size_t r, std::size_t c) const;

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<Index>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// y = x^T A (row vector times matrix).
  std::vector<double> left_multiply(std::span<const double> x) const;
  /// y = A x.
  std::vector<double> right_multiply(std::span<const double> x) const;

  DenseMatrix to_dense() const;

  double max_row_sum_error() const;
  bool all_nonnegative() const;

  bool operator==(const CsrMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Product A * B of two sparse matrices.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace epiplan
