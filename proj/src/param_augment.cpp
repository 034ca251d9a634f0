#include "epiplan/param_augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "epiplan/errors.hpp"

namespace epiplan {

std::size_t ParamGrid::size() const {
  std::size_t n = 1;
  for (const auto& d : dims) n *= d.support.size();
  return n;
}

std::vector<double> ParamGrid::point(std::size_t index) const {
  if (index >= size()) throw ContractError("ParamGrid::point: index out of range");
  std::vector<double> values;
  values.reserve(dims.size());
  for (const auto& d : dims) {
    values.push_back(d.support[index % d.support.size()]);
    index /= d.support.size();
  }
  return values;
}

void ParamGrid::validate() const {
  for (const auto& d : dims) {
    if (d.name != "beta_scale" && d.name != "alpha_mix") throw ConfigError("unknown augmented parameter: " + d.name);
    if (d.support.empty()) throw ConfigError("parameter support must be nonempty");
    for (std::size_t k = 0; k < d.support.size(); ++k) {
      if (!std::isfinite(d.support[k])) throw ConfigError("parameter support must be finite");
      if (k > 0 && !(d.support[k] > d.support[k - 1])) throw ConfigError("parameter support must be strictly sorted");
    }
    if (!(d.variance >= 0.0) || !std::isfinite(d.variance)) throw ConfigError("parameter variance must be >= 0");
  }
}

TsirParams apply_parameters(const TsirParams& base, const ParamGrid& grid, std::size_t point) {
  TsirParams p = base;
  const auto values = grid.point(point);
  for (std::size_t k = 0; k < grid.dims.size(); ++k) {
    if (grid.dims[k].name == "beta_scale") {
      for (double& b : p.beta_seasonal) b *= values[k];
    } else if (grid.dims[k].name == "alpha_mix") {
      p.alpha_mix = values[k];
    }
  }
  p.validate();
  return p;
}

DenseMatrix random_walk_kernel(const ParamGrid::Dimension& dim) {
  const std::size_t m = dim.support.size();
  DenseMatrix k(m, m);
  if (dim.variance == 0.0) {
    for (std::size_t i = 0; i < m; ++i) k(i, i) = 1.0;
    return k;
  }
  const boost::math::normal_distribution<double> step(0.0, std::sqrt(dim.variance));
  for (std::size_t i = 0; i < m; ++i) {
    double below = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double upper = j + 1 == m ? 1.0
                                      : boost::math::cdf(step, 0.5 * (dim.support[j] + dim.support[j + 1]) - dim.support[i]);
      k(i, j) = std::max(0.0, upper - below);
      below = upper;
    }
  }
  return k;
}

CsrMatrix parameter_kernel(const ParamGrid& grid) {
  grid.validate();
  const std::size_t n = grid.size();
  std::vector<DenseMatrix> per_dim;
  for (const auto& d : grid.dims) per_dim.push_back(random_walk_kernel(d));
  std::vector<std::vector<CsrMatrix::Entry>> rows(n);
  for (std::size_t from = 0; from < n; ++from) {
    for (std::size_t to = 0; to < n; ++to) {
      double p = 1.0;
      std::size_t f = from;
      std::size_t t = to;
      for (std::size_t k = 0; k < grid.dims.size() && p != 0.0; ++k) {
        const std::size_t m = grid.dims[k].support.size();
        p *= per_dim[k](f % m, t % m);
        f /= m;
        t /= m;
      }
      if (p != 0.0) rows[from].push_back({static_cast<CsrMatrix::Index>(to), p});
    }
  }
  return CsrMatrix::from_rows(n, std::move(rows));
}

ParamAugmentedModel augment_transitions(const std::vector<TransitionModel>& per_point, const CsrMatrix& kernel) {
  if (per_point.empty()) throw ContractError("augment_transitions: no parameter points");
  if (kernel.rows() != per_point.size() || kernel.cols() != per_point.size()) {
    throw ContractError("augment_transitions: kernel size mismatch");
  }
  const std::size_t base = per_point.front().states();
  const std::size_t actions = per_point.front().actions();
  for (const auto& m : per_point) {
    if (m.states() != base || m.actions() != actions) throw ContractError("augment_transitions: inconsistent blocks");
  }
  ParamAugmentedModel out;
  out.base_states = base;
  out.param_points = per_point.size();
  out.transitions.coverage = per_point.front().coverage;
  const std::size_t n = base * out.param_points;
  for (std::size_t a = 0; a < actions; ++a) {
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<CsrMatrix::Index> cols;
    std::vector<double> vals;
    for (std::size_t p = 0; p < out.param_points; ++p) {
      const auto& t = per_point[p].matrices[a];
      auto kc = kernel.row_cols(p);
      auto kv = kernel.row_values(p);
      for (std::size_t s = 0; s < base; ++s) {
        // Target blocks are visited in increasing p', so columns stay sorted.
        for (std::size_t q = 0; q < kc.size(); ++q) {
          auto tc = t.row_cols(s);
          auto tv = t.row_values(s);
          for (std::size_t j = 0; j < tc.size(); ++j) {
            cols.push_back(static_cast<CsrMatrix::Index>(kc[q] * base + tc[j]));
            vals.push_back(tv[j] * kv[q]);
          }
        }
        row_ptr[p * base + s + 1] = cols.size();
      }
    }
    out.transitions.matrices.push_back(CsrMatrix::from_arrays(n, n, std::move(row_ptr), std::move(cols), std::move(vals)));
  }
  return out;
}

ParamAugmentedModel augment_with_params(const TsirParams& params, const StateGrid& grid,
                                        const InterventionSet& actions, std::size_t n_quadrature,
                                        const ParamGrid& pg, std::size_t state_budget) {
  pg.validate();
  const std::size_t points = pg.size();
  if (points > state_budget / std::max<std::size_t>(grid.size(), 1) || grid.size() * points > state_budget) {
    throw ConfigError("parameter-augmented state space exceeds the configured budget");
  }
  std::vector<TransitionModel> per_point;
  per_point.reserve(points);
  for (std::size_t p = 0; p < points; ++p) {
    per_point.push_back(build_transition(grid, apply_parameters(params, pg, p), actions, n_quadrature));
  }
  return augment_transitions(per_point, parameter_kernel(pg));
}

DenseMatrix lift_observation(const DenseMatrix& base, std::size_t param_points) {
  DenseMatrix out(base.rows() * param_points, base.cols());
  for (std::size_t p = 0; p < param_points; ++p) {
    for (std::size_t s = 0; s < base.rows(); ++s) {
      std::copy(base.row(s).begin(), base.row(s).end(), out.row(p * base.rows() + s).begin());
    }
  }
  return out;
}

std::vector<double> lift_values(const std::vector<double>& base, std::size_t param_points) {
  std::vector<double> out;
  out.reserve(base.size() * param_points);
  for (std::size_t p = 0; p < param_points; ++p) out.insert(out.end(), base.begin(), base.end());
  return out;
}

std::vector<double> param_posterior(const Belief& b, const ParamGrid& pg, std::size_t base_states) {
  const std::size_t points = pg.size();
  const std::size_t block = points * base_states;
  if (base_states == 0 || b.size() % block != 0) throw ContractError("param_posterior: belief dimension mismatch");
  std::vector<double> m(points, 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) m[(i % block) / base_states] += b[i];
  double total = 0.0;
  for (double v : m) total += v;
  for (double& v : m) v /= total;
  return m;
}

}  // namespace epiplan
