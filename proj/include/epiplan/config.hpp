#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "epiplan/artifacts.hpp"
#include "epiplan/calibration.hpp"
#include "epiplan/param_augment.hpp"
#include "epiplan/sia_harness.hpp"
#include "epiplan/voi_planner.hpp"

namespace epiplan {

/// Range of grid representatives; a point range [x, x] selects the bin that
/// contains x.
struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const ValueRange&) const = default;
};

struct InitialSpec {
  ValueRange susceptible;
  ValueRange infected;
  int tau = 0;

  bool operator==(const InitialSpec&) const = default;
};

/// Uniform belief over the base cells of slice `tau` whose representatives lie
/// in both ranges. Throws ConfigError when no cell qualifies.
Belief initial_belief(const StateGrid& grid, const InitialSpec& spec);

enum class SolveMode { mdp, pomdp_exact, pomdp_reduced };

std::string to_string(SolveMode mode);
SolveMode parse_solve_mode(const std::string& text);
PruneMode parse_prune_mode(const std::string& text);

/// Everything one invocation needs. Paths are absolute after loading.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  // Model source: inline parameters, a parameter file, or calibration.
  std::optional<TsirParams> parameters;
  std::string parameters_file;
  std::string case_series;
  double default_population = 0.0;
  CalibrationOptions calibration;

  std::size_t s_bins = 8;
  std::size_t i_bins = 12;
  std::size_t quadrature = 16;
  InterventionSet interventions{{0.0, 0.5}};
  SurveyDesign survey{{0.0}, 8, {}};
  TestCharacteristics tests{0.95, 0.99};
  CostModel costs{1.0, 0.0, 0.0, 0.95};
  InitialSpec initial;

  SolveMode mode = SolveMode::pomdp_exact;
  std::size_t horizon = 12;
  bool surveillance = true;
  bool parameter_augmentation = false;
  PruneMode prune = PruneMode::automatic;
  std::size_t witness_trajectories = 200;
  ParamGrid parameter_grid;

  std::size_t reps = 1000;
  BudgetSpec budget{1.0, 0.5};

  void validate() const;
};

/// Strict reader: unknown keys, wrong types and missing referenced files are
/// ConfigErrors. Relative paths resolve against `base_dir`.
RunConfig parse_config(const Json& j, const std::string& base_dir);
RunConfig load_config(const std::string& path);

}  // namespace epiplan
