#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "epiplan/belief.hpp"
#include "epiplan/epi_model.hpp"
#include "epiplan/matrix.hpp"

namespace epiplan {

/// Unknown model parameters appended to the state as discrete supports, each
/// following a Gaussian random walk p' = p + theta, theta ~ N(0, variance).
///
/// Recognized names: "beta_scale" (multiplier on every beta_seasonal entry)
/// and "alpha_mix".
struct ParamGrid {
  struct Dimension {
    std::string name = "beta_scale";
    std::vector<double> support{1.0};
    double variance = 0.0;

    bool operator==(const Dimension&) const = default;
  };
  std::vector<Dimension> dims;

  /// Number of joint support points (product over dimensions).
  std::size_t size() const;
  /// Per-dimension values of joint point `index`; dimension 0 varies fastest.
  std::vector<double> point(std::size_t index) const;
  void validate() const;

  bool operator==(const ParamGrid&) const = default;
};

/// Base parameters with the point's values substituted.
TsirParams apply_parameters(const TsirParams& base, const ParamGrid& grid, std::size_t point);

/// Random-walk kernel of one dimension on its support: Gaussian increments
/// discretized by cdf differences between support midpoints; tail mass goes to
/// the end points.
DenseMatrix random_walk_kernel(const ParamGrid::Dimension& dim);

/// Joint kernel over all support points (product of the per-dimension kernels).
CsrMatrix parameter_kernel(const ParamGrid& grid);

/// Transition model over (parameter point, base state), flat index p * base + s.
struct ParamAugmentedModel {
  TransitionModel transitions;
  std::size_t base_states = 0;
  std::size_t param_points = 0;

  std::size_t index(std::size_t base_state, std::size_t point) const { return point * base_states + base_state; }
};

/// Combines per-point base models with the parameter kernel:
/// T[(p, s), (p', s')] = T_p[s, s'] * K[p, p'].
ParamAugmentedModel augment_transitions(const std::vector<TransitionModel>& per_point, const CsrMatrix& kernel);

inline constexpr std::size_t kDefaultAugmentedStateBudget = 400000;

ParamAugmentedModel augment_with_params(const TsirParams& params, const StateGrid& grid,
                                        const InterventionSet& actions, std::size_t n_quadrature,
                                        const ParamGrid& pg, std::size_t state_budget = kDefaultAugmentedStateBudget);

/// Replicates base rows over the parameter component.
DenseMatrix lift_observation(const DenseMatrix& base, std::size_t param_points);
std::vector<double> lift_values(const std::vector<double>& base, std::size_t param_points);

/// Marginal over parameter points. The belief may carry further outer
/// components (e.g. survey memory); its size must be a multiple of
/// param_points * base_states.
std::vector<double> param_posterior(const Belief& b, const ParamGrid& pg, std::size_t base_states);

}  // namespace epiplan
