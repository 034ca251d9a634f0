#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "epiplan/kernels.hpp"
#include "kernels_detail.hpp"

namespace epiplan::kernels {

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

CsrMatrix transition_matrix(const StateGrid& grid, const TsirParams& params, double mu,
                            std::span<const double> noise_nodes) {
  const auto n = static_cast<std::int64_t>(grid.size());
  std::vector<std::vector<CsrMatrix::Entry>> rows(grid.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t cell = 0; cell < n; ++cell) {
    rows[static_cast<std::size_t>(cell)] =
        transition_row(grid, params, mu, noise_nodes, static_cast<std::size_t>(cell));
  }
  return CsrMatrix::from_rows(grid.size(), std::move(rows));
}

DenseMatrix dense_rows(std::size_t rows, std::size_t cols, const RowFiller& fill) {
  DenseMatrix m(rows, cols);
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t r = 0; r < n; ++r) fill(static_cast<std::size_t>(r), m.row(static_cast<std::size_t>(r)));
  return m;
}

Projections project(const CsrMatrix& transition, const DenseMatrix& observation,
                    std::span<const std::size_t> observations, std::span<const std::vector<double>> next) {
  detail::check_projection_inputs(transition, observation, observations, next);
  Projections out(observations.size() * next.size());
  const auto slots = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t slot = 0; slot < slots; ++slot) {
    const auto k = static_cast<std::size_t>(slot);
    detail::project_one(transition, observation, observations[k / next.size()], next[k % next.size()], out[k]);
  }
  return out;
}

WitnessChoice witness_argmin(const Projections& proj, std::size_t n_obs, std::size_t n_next,
                             std::span<const SparseVector> witnesses) {
  WitnessChoice best(witnesses.size() * n_obs);
  const auto n = static_cast<std::int64_t>(witnesses.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t w = 0; w < n; ++w) {
    const auto k = static_cast<std::size_t>(w);
    detail::witness_one(proj, n_obs, n_next, witnesses[k], best.data() + k * n_obs);
  }
  return best;
}

std::vector<double> min_values(std::span<const std::vector<double>> vectors, std::span<const SparseVector> beliefs) {
  std::vector<double> out(beliefs.size());
  const auto n = static_cast<std::int64_t>(beliefs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < n; ++b) {
    out[static_cast<std::size_t>(b)] = detail::min_one(vectors, beliefs[static_cast<std::size_t>(b)]);
  }
  return out;
}

}  // namespace parallel
}  // namespace epiplan::kernels
