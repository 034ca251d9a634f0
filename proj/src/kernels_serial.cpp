#include <algorithm>
#include <limits>

#include "epiplan/errors.hpp"
#include "epiplan/kernels.hpp"
#include "kernels_detail.hpp"

namespace epiplan::kernels {

std::vector<CsrMatrix::Entry> transition_row(const StateGrid& grid, const TsirParams& params, double mu,
                                             std::span<const double> noise_nodes, std::size_t cell) {
  const EpiState from = grid.representative(cell);
  const double weight = 1.0 / static_cast<double>(noise_nodes.size());
  std::vector<CsrMatrix::Entry> entries;
  entries.reserve(8);
  for (double eps : noise_nodes) {
    const auto dest = static_cast<CsrMatrix::Index>(grid.cell_of(tsir_step(from, mu, params, eps)));
    auto it = std::find_if(entries.begin(), entries.end(), [dest](const auto& e) { return e.col == dest; });
    if (it == entries.end()) {
      entries.push_back({dest, weight});
    } else {
      it->value += weight;
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
  double total = 0.0;
  for (const auto& e : entries) total += e.value;
  for (auto& e : entries) e.value /= total;
  return entries;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector v;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      v.index.push_back(i);
      v.value.push_back(dense[i]);
    }
  }
  return v;
}

double SparseVector::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * dense[index[k]];
  return s;
}

namespace detail {

// Shared per-element bodies so the serial and parallel loops cannot drift apart.

void project_one(const CsrMatrix& t, const DenseMatrix& o, std::size_t obs, std::span<const double> next,
                 std::vector<double>& out) {
  out.assign(t.rows(), 0.0);
  // Weighted next-stage values, O[k, obs] * next[k].
  std::vector<double> weighted(t.cols());
  for (std::size_t k = 0; k < t.cols(); ++k) weighted[k] = o(k, obs) * next[k];
  const auto& ptr = t.row_ptr();
  const auto& col = t.col_idx();
  const auto& val = t.values();
  for (std::size_t s = 0; s < t.rows(); ++s) {
    double acc = 0.0;
    for (std::size_t k = ptr[s]; k < ptr[s + 1]; ++k) acc += val[k] * weighted[col[k]];
    out[s] = acc;
  }
}

void witness_one(const Projections& proj, std::size_t n_obs, std::size_t n_next, const SparseVector& w,
                 std::size_t* best) {
  for (std::size_t o = 0; o < n_obs; ++o) {
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < n_next; ++j) {
      const double v = w.dot(proj[o * n_next + j]);
      if (v < best_value) {
        best_value = v;
        best_j = j;
      }
    }
    best[o] = best_j;
  }
}

double min_one(std::span<const std::vector<double>> vectors, const SparseVector& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vectors) best = std::min(best, b.dot(v));
  return best;
}

void check_projection_inputs(const CsrMatrix& t, const DenseMatrix& o, std::span<const std::size_t> observations,
                             std::span<const std::vector<double>> next) {
  if (o.rows() != t.cols()) throw ContractError("project: observation rows must match transition columns");
  for (auto obs : observations) {
    if (obs >= o.cols()) throw ContractError("project: observation index out of range");
  }
  for (const auto& v : next) {
    if (v.size() != t.cols()) throw ContractError("project: next-stage vector dimension mismatch");
  }
}

}  // namespace detail

namespace serial {

CsrMatrix transition_matrix(const StateGrid& grid, const TsirParams& params, double mu,
                            std::span<const double> noise_nodes) {
  std::vector<std::vector<CsrMatrix::Entry>> rows(grid.size());
  for (std::size_t cell = 0; cell < rows.size(); ++cell) rows[cell] = transition_row(grid, params, mu, noise_nodes, cell);
  return CsrMatrix::from_rows(grid.size(), std::move(rows));
}

DenseMatrix dense_rows(std::size_t rows, std::size_t cols, const RowFiller& fill) {
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) fill(r, m.row(r));
  return m;
}

Projections project(const CsrMatrix& transition, const DenseMatrix& observation,
                    std::span<const std::size_t> observations, std::span<const std::vector<double>> next) {
  detail::check_projection_inputs(transition, observation, observations, next);
  Projections out(observations.size() * next.size());
  for (std::size_t slot = 0; slot < out.size(); ++slot) {
    detail::project_one(transition, observation, observations[slot / next.size()], next[slot % next.size()],
                        out[slot]);
  }
  return out;
}

WitnessChoice witness_argmin(const Projections& proj, std::size_t n_obs, std::size_t n_next,
                             std::span<const SparseVector> witnesses) {
  WitnessChoice best(witnesses.size() * n_obs);
  for (std::size_t w = 0; w < witnesses.size(); ++w) {
    detail::witness_one(proj, n_obs, n_next, witnesses[w], best.data() + w * n_obs);
  }
  return best;
}

std::vector<double> min_values(std::span<const std::vector<double>> vectors, std::span<const SparseVector> beliefs) {
  std::vector<double> out(beliefs.size());
  for (std::size_t b = 0; b < beliefs.size(); ++b) out[b] = detail::min_one(vectors, beliefs[b]);
  return out;
}

}  // namespace serial
}  // namespace epiplan::kernels
