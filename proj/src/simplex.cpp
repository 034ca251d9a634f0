#include "simplex.hpp"

#include <cmath>
#include <limits>

#include "epiplan/errors.hpp"

namespace epiplan::detail {

LpResult maximize(const DenseMatrix& a, std::span<const double> b, std::span<const double> c) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m || c.size() != n) throw ContractError("simplex: dimension mismatch");
  constexpr double kPivotTol = 1e-12;

  // Tableau rows 0..m-1 are constraints, row m is the objective (reduced costs).
  // Columns 0..n-1 structural, n..n+m-1 slack, n+m right-hand side.
  const std::size_t width = n + m + 1;
  DenseMatrix t(m + 1, width);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) throw ContractError("simplex: negative right-hand side");
    for (std::size_t j = 0; j < n; ++j) t(i, j) = a(i, j);
    t(i, n + i) = 1.0;
    t(i, width - 1) = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t(m, j) = -c[j];

  const std::size_t max_pivots = 50 * (m + n) + 100;
  for (std::size_t iter = 0; iter < max_pivots; ++iter) {
    // Bland: entering column is the lowest index with negative reduced cost.
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (t(m, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) {
      LpResult r;
      r.objective = t(m, width - 1);
      r.x.assign(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) r.x[basis[i]] = t(i, width - 1);
      }
      return r;
    }
    // Ratio test, ties to the lowest basis index.
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double coef = t(i, enter);
      if (coef <= kPivotTol) continue;
      const double ratio = t(i, width - 1) / coef;
      if (ratio < best_ratio - 1e-15 || (std::abs(ratio - best_ratio) <= 1e-15 && leave < m && basis[i] < basis[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == m) return LpResult{true, std::numeric_limits<double>::infinity(), {}};

    const double pivot = t(leave, enter);
    for (std::size_t j = 0; j < width; ++j) t(leave, j) /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t(i, j) -= f * t(leave, j);
    }
    basis[leave] = enter;
  }
  throw SolverError("simplex: pivot limit reached");
}

}  // namespace epiplan::detail
