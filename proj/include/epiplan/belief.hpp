#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epiplan/epi_model.hpp"
#include "epiplan/matrix.hpp"
#include "epiplan/obs_model.hpp"

namespace epiplan {

/// Probability weights over the active (possibly augmented) state space.
class Belief {
 public:
  Belief() = default;
  /// Validates nonnegativity and normalization within 1e-9.
  explicit Belief(std::vector<double> weights);

  static Belief point_mass(std::size_t states, std::size_t index);
  static Belief uniform(std::size_t states);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  bool operator==(const Belief&) const = default;

 private:
  std::vector<double> weights_;
};

inline constexpr double kNormalizationTolerance = 1e-9;

/// b'(s') = sum_s T[s, s'] b(s), renormalized.
Belief predict(const Belief& b, const CsrMatrix& transition);
Belief predict(const Belief& b, std::size_t action, const TransitionModel& model);

/// Pr(o | b_pred) for every observation column of `observation`.
std::vector<double> obs_marginal(const Belief& b_pred, const DenseMatrix& observation);
std::vector<double> obs_marginal(const Belief& b_pred, std::size_t level, const ObservationModel& model);

/// Bayes update on the observation likelihood column; throws ImpossibleObservation
/// when the observation has zero probability under b_pred.
Belief update(const Belief& b_pred, std::size_t observation, const DenseMatrix& likelihood);
Belief update(const Belief& b_pred, std::size_t observation, std::size_t level, const ObservationModel& model);

}  // namespace epiplan
