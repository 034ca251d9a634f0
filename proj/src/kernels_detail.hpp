#pragma once

#include "epiplan/kernels.hpp"

namespace epiplan::kernels::detail {

void project_one(const CsrMatrix& t, const DenseMatrix& o, std::size_t obs, std::span<const double> next,
                 std::vector<double>& out);
void witness_one(const Projections& proj, std::size_t n_obs, std::size_t n_next, const SparseVector& w,
                 std::size_t* best);
double min_one(std::span<const std::vector<double>> vectors, const SparseVector& b);
void check_projection_inputs(const CsrMatrix& t, const DenseMatrix& o, std::span<const std::size_t> observations,
                             std::span<const std::vector<double>> next);

}  // namespace epiplan::kernels::detail
