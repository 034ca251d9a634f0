#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel; both produce
// bit-identical results because every output element is computed by exactly
// one iteration in a fixed order.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "epiplan/epi_model.hpp"
#include "epiplan/matrix.hpp"

namespace epiplan::kernels {

/// Destination distribution of one source cell under one action.
std::vector<CsrMatrix::Entry> transition_row(const StateGrid& grid, const TsirParams& params, double mu,
                                             std::span<const double> noise_nodes, std::size_t cell);

/// Row function for dense row-stochastic builds: fills `out` for row r.
using RowFiller = std::function<void(std::size_t r, std::span<double> out)>;

/// A sparse vector over the state space (typically a belief restricted to its support).
struct SparseVector {
  std::vector<std::size_t> index;
  std::vector<double> value;

  static SparseVector from_dense(std::span<const double> dense);
  double dot(std::span<const double> dense) const;
};

/// out[slot][s] = sum_k T[s, k] * O[k, obs[slot / n_next]] * next[slot % n_next][k]
/// for every (observation, next-vector) pair.
using Projections = std::vector<std::vector<double>>;

/// best[w * n_obs + o] = argmin_j <proj[o * n_next + j], witness_w>, ties to lowest j.
using WitnessChoice = std::vector<std::size_t>;

namespace serial {
CsrMatrix transition_matrix(const StateGrid& grid, const TsirParams& params, double mu,
                            std::span<const double> noise_nodes);
DenseMatrix dense_rows(std::size_t rows, std::size_t cols, const RowFiller& fill);
Projections project(const CsrMatrix& transition, const DenseMatrix& observation,
                    std::span<const std::size_t> observations, std::span<const std::vector<double>> next);
WitnessChoice witness_argmin(const Projections& proj, std::size_t n_obs, std::size_t n_next,
                             std::span<const SparseVector> witnesses);
/// min_j <vectors[j], belief> per belief.
std::vector<double> min_values(std::span<const std::vector<double>> vectors, std::span<const SparseVector> beliefs);
}  // namespace serial

namespace parallel {
CsrMatrix transition_matrix(const StateGrid& grid, const TsirParams& params, double mu,
                            std::span<const double> noise_nodes);
DenseMatrix dense_rows(std::size_t rows, std::size_t cols, const RowFiller& fill);
Projections project(const CsrMatrix& transition, const DenseMatrix& observation,
                    std::span<const std::size_t> observations, std::span<const std::vector<double>> next);
WitnessChoice witness_argmin(const Projections& proj, std::size_t n_obs, std::size_t n_next,
                             std::span<const SparseVector> witnesses);
std::vector<double> min_values(std::span<const std::vector<double>> vectors, std::span<const SparseVector> beliefs);
}  // namespace parallel

/// Worker threads the parallel kernels use (1 when built without OpenMP).
int thread_count();

// Default dispatch used by the library modules.
using parallel::dense_rows;
using parallel::min_values;
using parallel::project;
using parallel::transition_matrix;
using parallel::witness_argmin;

}  // namespace epiplan::kernels
