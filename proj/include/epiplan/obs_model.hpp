#pragma once

#include <cstddef>
#include <vector>

#include "epiplan/epi_model.hpp"
#include "epiplan/matrix.hpp"

namespace epiplan {

/// Binary test characteristics: q1 sensitivity, q2 specificity.
struct TestCharacteristics {
  double sensitivity = 1.0;
  double specificity = 1.0;

  /// Informative tests need q1 + q2 > 1. `allow_uninformative` admits the
  /// q1 + q2 = 1 boundary, which only the tests use.
  void validate(bool allow_uninformative = false) const;

  bool operator==(const TestCharacteristics&) const = default;
};

/// Survey levels a_o = 0..A_o. Level 0 is "no survey". Observations are the
/// positive fraction o/n binned into `obs_bins` equal-width bins over [0, 1];
/// observation index 0 is reserved for the null observation of an empty survey,
/// so bin j of the fraction maps to observation j + 1.
struct SurveyDesign {
  std::vector<double> coverage{0.0};
  std::size_t obs_bins = 8;
  /// Optional explicit fraction edges (obs_bins + 1 values from 0 to 1);
  /// empty means equal-width bins.
  std::vector<double> bin_edges;

  static constexpr std::size_t kNullObservation = 0;

  std::size_t levels() const noexcept { return coverage.size(); }
  std::size_t observation_count() const noexcept { return obs_bins + 1; }
  std::size_t sample_size(std::size_t level, double population) const;
  /// Bin edges over the positive fraction, obs_bins + 1 entries from 0 to 1.
  std::vector<double> edges() const;
  /// Observation index (1..obs_bins) of a positive fraction in [0, 1].
  std::size_t observation_of_fraction(double fraction) const;
  void validate() const;

  bool operator==(const SurveyDesign&) const = default;
};

/// O[level](s, j) = Pr(observation j | state s) after the survey at `level`.
struct ObservationModel {
  std::vector<DenseMatrix> levels;

  std::size_t observation_count() const noexcept { return levels.empty() ? 0 : levels.front().cols(); }
  double max_row_sum_error() const;

  bool operator==(const ObservationModel&) const = default;
};

/// Per-person positive probability (q1 I + (1 - q2)(N - I)) / N.
double positive_rate(const EpiState& state, const TestCharacteristics& q, double population);

/// Binomial pmf over positive counts 0..n for the survey at `level`. Level 0
/// (and any level with n = 0) returns {1}.
std::vector<double> obs_pmf(const EpiState& state, std::size_t level, const SurveyDesign& design,
                            const TestCharacteristics& q, double population);

ObservationModel build_observation(const StateGrid& grid, const SurveyDesign& design, const TestCharacteristics& q,
                                   bool allow_uninformative = false);

}  // namespace epiplan
