#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epiplan/epi_model.hpp"

namespace epiplan {

/// One biweek of surveillance data. `births` enter between step t and t + 1,
/// matching birth_schedule[t mod 24].
struct CaseRecord {
  long t = 0;
  double cases = 0.0;
  double births = 0.0;
  double population = 0.0;

  bool operator==(const CaseRecord&) const = default;
};

struct CaseSeries {
  std::vector<CaseRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  /// Contiguous time indices, nonnegative counts, positive population.
  void validate() const;
  bool operator==(const CaseSeries&) const = default;
};

/// CSV with header `t,cases,births[,population]`. A missing population column
/// takes `default_population`. Throws DataError on malformed input.
CaseSeries read_case_series(std::istream& in, double default_population = 0.0);
CaseSeries load_case_series(const std::string& path, double default_population = 0.0);
void write_case_series(std::ostream& out, const CaseSeries& series);

/// Noisy TSIR realization from `initial` for `steps` steps; record 0 holds the
/// initial incidence. Used for synthetic data.
CaseSeries simulate_case_series(const TsirParams& params, const EpiState& initial, std::size_t steps,
                                std::uint64_t seed);

struct CalibrationOptions {
  /// Fix the mixing exponent instead of estimating it.
  std::optional<double> alpha_mix;
  /// Fix the mean susceptible fraction instead of the profile search.
  std::optional<double> mean_susceptible_fraction;
  /// Candidate mean susceptible fractions of N for the profile search.
  std::vector<double> fraction_grid = default_fraction_grid();
  std::size_t min_length = 2 * kSeasonLength;

  static std::vector<double> default_fraction_grid();
};

struct CalibrationResult {
  TsirParams params;
  double mean_susceptible = 0.0;
  double residual_ss = 0.0;
  std::size_t used_steps = 0;
  std::size_t excluded_steps = 0;
  /// Reconstructed susceptibles, one per record.
  std::vector<double> susceptible;
};

/// Susceptible reconstruction around a profiled mean, then least squares of
/// log I_t - log S_{t-1} on 24 seasonal intercepts and log I_{t-1}. Steps with a
/// zero count on either side are left out. Throws CalibrationError.
CalibrationResult calibrate(const CaseSeries& series, const CalibrationOptions& options = {});

}  // namespace epiplan
