#include "epiplan/pomdp.hpp"

#include <algorithm>
#include <cmath>

#include "epiplan/errors.hpp"

namespace epiplan {

double PomdpModel::realized_cost(std::size_t s, std::size_t a, std::size_t s_next) const {
  if (!transition_cost) return cost(s, a);
  const double new_cases = std::max(incidence_of(s_next) - incidence_of(s), 0.0);
  return transition_cost->case_cost * new_cases + transition_cost->action_cost[a];
}

void PomdpModel::validate() const {
  const std::size_t n = states();
  if (transitions.empty()) throw ContractError("PomdpModel: no actions");
  if (!action_labels.empty() && action_labels.size() != actions()) {
    throw ContractError("PomdpModel: action label count mismatch");
  }
  for (const auto& t : transitions) {
    if (t.rows() != n || t.cols() != n) throw ContractError("PomdpModel: transition matrices must be square and equal");
    if (!t.all_nonnegative() || t.max_row_sum_error() > 1e-9) {
      throw ContractError("PomdpModel: transition rows must be stochastic");
    }
  }
  if (observation_channels.empty()) throw ContractError("PomdpModel: no observation channel");
  for (const auto& o : observation_channels) {
    if (o.rows() != n || o.cols() != observations()) throw ContractError("PomdpModel: observation shape mismatch");
    if (o.max_row_sum_error() > 1e-9) throw ContractError("PomdpModel: observation rows must be stochastic");
    for (double v : o.data()) {
      if (!(v >= 0.0)) throw ContractError("PomdpModel: negative observation probability");
    }
  }
  if (channel_of_action.size() != actions()) throw ContractError("PomdpModel: channel map size mismatch");
  for (auto c : channel_of_action) {
    if (c >= observation_channels.size()) throw ContractError("PomdpModel: channel index out of range");
  }
  if (cost.rows() != n || cost.cols() != actions()) throw ContractError("PomdpModel: cost table shape mismatch");
  for (double v : cost.data()) {
    if (!std::isfinite(v)) throw ContractError("PomdpModel: non-finite cost");
  }
  if (!terminal.empty() && terminal.size() != n) throw ContractError("PomdpModel: terminal size mismatch");
  if (!incidence.empty() && incidence.size() != n) throw ContractError("PomdpModel: incidence size mismatch");
  if (transition_cost && transition_cost->action_cost.size() != actions()) {
    throw ContractError("PomdpModel: action cost size mismatch");
  }
}

DenseMatrix delta_observation(std::size_t states) {
  DenseMatrix o(states, states);
  for (std::size_t s = 0; s < states; ++s) o(s, s) = 1.0;
  return o;
}

}  // namespace epiplan
