#pragma once

#include <cstddef>
#include <vector>

#include "epiplan/belief.hpp"
#include "epiplan/dp_solver.hpp"
#include "epiplan/epi_model.hpp"
#include "epiplan/matrix.hpp"
#include "epiplan/obs_model.hpp"
#include "epiplan/pomdp.hpp"

namespace epiplan {

struct CostModel {
  double case_cost = 0.0;         // per new case
  double vaccination_cost = 0.0;  // per intervention level unit
  double test_cost = 0.0;         // per person tested
  double discount = 1.0;

  void validate() const;

  bool operator==(const CostModel&) const = default;
};

struct AugmentedAction {
  std::size_t intervention = 0;  // a_s
  std::size_t survey = 0;        // a_o

  bool operator==(const AugmentedAction&) const = default;
};

/// c_i * max(I' - I, 0) + c_v * a_s + c_o * n(a_o).
double stage_cost(double incidence_from, double incidence_to, const AugmentedAction& action, std::size_t tested,
                  const CostModel& cm);
double stage_cost(const StateGrid& grid, std::size_t from_cell, std::size_t to_cell, const AugmentedAction& action,
                  const SurveyDesign& design, const CostModel& cm);

/// Model-agnostic ingredients of the surveillance-augmented POMDP.
struct AugmentationInputs {
  std::vector<CsrMatrix> base_transitions;        // per intervention level
  std::vector<DenseMatrix> survey_observations;   // per survey level; level 0 is the null survey
  std::vector<double> incidence;                  // per base state
  std::vector<std::size_t> sample_sizes;          // persons tested per survey level

  std::size_t base_states() const noexcept {
    return base_transitions.empty() ? 0 : base_transitions.front().rows();
  }
};

AugmentationInputs tsir_augmentation_inputs(const StateGrid& grid, const TransitionModel& transitions,
                                            const ObservationModel& observations, const SurveyDesign& design);

/// Product space (survey memory s_o, base state), flat index s_o * base + s.
/// Joint actions enumerate (a_s, a_o) with a_o varying fastest.
struct AugmentedSpace {
  PomdpModel model;
  std::size_t base_states = 0;
  std::size_t survey_levels = 0;
  std::vector<AugmentedAction> joint;

  std::size_t lift(std::size_t base_state, std::size_t survey_memory = 0) const {
    return survey_memory * base_states + base_state;
  }
  Belief lift(const Belief& base, std::size_t survey_memory = 0) const;
  /// Marginal over the survey-memory component.
  std::vector<double> base_marginal(const Belief& b) const;
  std::size_t action_index(const AugmentedAction& a) const;
};

AugmentedSpace build_augmented(const AugmentationInputs& inputs, const CostModel& cm);

/// Same state space with only the a_o = 0 joint actions.
AugmentedSpace restrict_to_no_survey(const AugmentedSpace& space);

struct VoiReport {
  double value_full = 0.0;
  double value_restricted = 0.0;
  double value_of_information = 0.0;
};

/// V_restricted(b0) - V_full(b0); b0 is a belief over base states.
VoiReport value_of_information(const AugmentationInputs& inputs, const CostModel& cm, const SolveSettings& settings,
                               const Belief& b0, const WitnessPlan* witnesses = nullptr);

}  // namespace epiplan
