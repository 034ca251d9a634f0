#include "epiplan/belief.hpp"

#include <cmath>
#include <string>

#include "epiplan/errors.hpp"

namespace epiplan {

namespace {

double total(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace

Belief::Belief(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ContractError("Belief: empty weight vector");
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("Belief: weights must be finite and nonnegative");
  }
  if (std::abs(total(weights_) - 1.0) > kNormalizationTolerance) throw ContractError("Belief: weights must sum to 1");
}

Belief Belief::point_mass(std::size_t states, std::size_t index) {
  if (index >= states) throw ContractError("Belief::point_mass: index out of range");
  std::vector<double> w(states, 0.0);
  w[index] = 1.0;
  return Belief(std::move(w));
}

Belief Belief::uniform(std::size_t states) {
  return Belief(std::vector<double>(states, 1.0 / static_cast<double>(states)));
}

Belief predict(const Belief& b, const CsrMatrix& transition) {
  if (b.size() != transition.rows() || transition.rows() != transition.cols()) {
    throw ContractError("predict: belief/transition dimension mismatch");
  }
  auto next = transition.left_multiply(b.weights());
  const double sum = total(next);
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw ContractError("predict: predicted mass drifted by " + std::to_string(sum - 1.0));
  }
  for (double& v : next) v /= sum;
  return Belief(std::move(next));
}

Belief predict(const Belief& b, std::size_t action, const TransitionModel& model) {
  if (action >= model.actions()) throw ContractError("predict: action out of range");
  return predict(b, model.matrices[action]);
}

std::vector<double> obs_marginal(const Belief& b_pred, const DenseMatrix& observation) {
  if (b_pred.size() != observation.rows()) throw ContractError("obs_marginal: dimension mismatch");
  std::vector<double> m(observation.cols(), 0.0);
  for (std::size_t s = 0; s < b_pred.size(); ++s) {
    const double w = b_pred[s];
    if (w == 0.0) continue;
    const auto row = observation.row(s);
    for (std::size_t o = 0; o < m.size(); ++o) m[o] += w * row[o];
  }
  return m;
}

std::vector<double> obs_marginal(const Belief& b_pred, std::size_t level, const ObservationModel& model) {
  if (level >= model.levels.size()) throw ContractError("obs_marginal: survey level out of range");
  return obs_marginal(b_pred, model.levels[level]);
}

Belief update(const Belief& b_pred, std::size_t observation, const DenseMatrix& likelihood) {
  if (b_pred.size() != likelihood.rows()) throw ContractError("update: dimension mismatch");
  if (observation >= likelihood.cols()) throw ContractError("update: observation out of range");
  // A likelihood that is constant over the support cancels exactly.
  double common = -1.0;
  bool constant = true;
  for (std::size_t s = 0; s < b_pred.size() && constant; ++s) {
    if (b_pred[s] == 0.0) continue;
    const double l = likelihood(s, observation);
    if (common < 0.0) common = l;
    constant = l == common;
  }
  if (constant && common > 0.0) return b_pred;

  std::vector<double> post(b_pred.size());
  double norm = 0.0;
  for (std::size_t s = 0; s < post.size(); ++s) {
    post[s] = likelihood(s, observation) * b_pred[s];
    norm += post[s];
  }
  if (!(norm > 0.0)) {
    throw ImpossibleObservation("update: observation " + std::to_string(observation) +
                                " has zero probability under the predicted belief");
  }
  for (double& v : post) v /= norm;
  return Belief(std::move(post));
}

Belief update(const Belief& b_pred, std::size_t observation, std::size_t level, const ObservationModel& model) {
  if (level >= model.levels.size()) throw ContractError("update: survey level out of range");
  return update(b_pred, observation, model.levels[level]);
}

}  // namespace epiplan
