#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "epiplan/matrix.hpp"

namespace epiplan {

/// Discrete finite POMDP over flat state indices. This is the common currency
/// between model construction (TSIR grid, augmentation) and the solvers.
struct PomdpModel {
  std::vector<std::string> action_labels;
  std::vector<CsrMatrix> transitions;            // per action, states x states
  std::vector<DenseMatrix> observation_channels;  // states x observations
  std::vector<std::size_t> channel_of_action;    // action -> observation channel
  DenseMatrix cost;                              // states x actions, expected stage cost
  std::vector<double> terminal;                  // empty means zero terminal value

  /// Incidence per state; feeds discounted-infection totals and the case term
  /// of transition-dependent costs. Empty means zero.
  std::vector<double> incidence;

  /// When set, the realized stage cost of (s, a, s') is
  /// case_cost * max(incidence[s'] - incidence[s], 0) + action_cost[a],
  /// and `cost` holds its expectation under T_a.
  struct TransitionCost {
    double case_cost = 0.0;
    std::vector<double> action_cost;
  };
  std::optional<TransitionCost> transition_cost;

  std::size_t states() const noexcept { return transitions.empty() ? 0 : transitions.front().rows(); }
  std::size_t actions() const noexcept { return transitions.size(); }
  std::size_t observations() const noexcept {
    return observation_channels.empty() ? 0 : observation_channels.front().cols();
  }
  const DenseMatrix& observation(std::size_t action) const {
    return observation_channels[channel_of_action[action]];
  }
  double terminal_value(std::size_t s) const { return terminal.empty() ? 0.0 : terminal[s]; }
  double incidence_of(std::size_t s) const { return incidence.empty() ? 0.0 : incidence[s]; }

  /// Cost of one realized transition, consistent with `cost` in expectation.
  double realized_cost(std::size_t s, std::size_t a, std::size_t s_next) const;

  /// Shape, stochasticity (1e-9) and finiteness checks; throws ContractError.
  void validate() const;
};

/// Fully observable special case: a single observation channel that reveals the
/// state exactly (delta rows).
DenseMatrix delta_observation(std::size_t states);

}  // namespace epiplan
