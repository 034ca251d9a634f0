#pragma once

#include <span>
#include <vector>

#include "epiplan/matrix.hpp"

namespace epiplan::detail {

struct LpResult {
  bool unbounded = false;
  double objective = 0.0;
  std::vector<double> x;
};

/// max c^T x  s.t.  A x <= b, x >= 0, with b >= 0 so the origin is feasible.
/// Dense tableau, Bland's rule. Intended for the small pruning LPs only.
LpResult maximize(const DenseMatrix& a, std::span<const double> b, std::span<const double> c);

}  // namespace epiplan::detail
