#include "epiplan/voi_planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epiplan/errors.hpp"

namespace epiplan {

void CostModel::validate() const {
  if (!(case_cost >= 0.0) || !(vaccination_cost >= 0.0) || !(test_cost >= 0.0)) {
    throw ConfigError("cost coefficients must be >= 0");
  }
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
}

double stage_cost(double incidence_from, double incidence_to, const AugmentedAction& action, std::size_t tested,
                  const CostModel& cm) {
  const double new_cases = std::max(incidence_to - incidence_from, 0.0);
  return cm.case_cost * new_cases + cm.vaccination_cost * static_cast<double>(action.intervention) +
         cm.test_cost * static_cast<double>(tested);
}

double stage_cost(const StateGrid& grid, std::size_t from_cell, std::size_t to_cell, const AugmentedAction& action,
                  const SurveyDesign& design, const CostModel& cm) {
  return stage_cost(grid.representative(from_cell).I, grid.representative(to_cell).I, action,
                    design.sample_size(action.survey, grid.population()), cm);
}

AugmentationInputs tsir_augmentation_inputs(const StateGrid& grid, const TransitionModel& transitions,
                                            const ObservationModel& observations, const SurveyDesign& design) {
  if (transitions.states() != grid.size()) throw ContractError("augmentation: transition/grid size mismatch");
  if (observations.levels.size() != design.levels()) throw ContractError("augmentation: survey level mismatch");
  AugmentationInputs in;
  in.base_transitions = transitions.matrices;
  in.survey_observations = observations.levels;
  in.incidence = grid.incidence();
  for (std::size_t level = 0; level < design.levels(); ++level) {
    in.sample_sizes.push_back(design.sample_size(level, grid.population()));
  }
  return in;
}

Belief AugmentedSpace::lift(const Belief& base, std::size_t survey_memory) const {
  if (base.size() != base_states) throw ContractError("lift: base belief dimension mismatch");
  if (survey_memory >= survey_levels) throw ContractError("lift: survey memory out of range");
  std::vector<double> w(base_states * survey_levels, 0.0);
  std::copy(base.weights().begin(), base.weights().end(), w.begin() + static_cast<std::ptrdiff_t>(lift(0, survey_memory)));
  return Belief(std::move(w));
}

std::vector<double> AugmentedSpace::base_marginal(const Belief& b) const {
  if (b.size() != base_states * survey_levels) throw ContractError("base_marginal: dimension mismatch");
  std::vector<double> m(base_states, 0.0);
  for (std::size_t k = 0; k < survey_levels; ++k) {
    for (std::size_t s = 0; s < base_states; ++s) m[s] += b[lift(s, k)];
  }
  return m;
}

std::size_t AugmentedSpace::action_index(const AugmentedAction& a) const {
  auto it = std::find(joint.begin(), joint.end(), a);
  if (it == joint.end()) throw ContractError("action_index: joint action not available");
  return static_cast<std::size_t>(it - joint.begin());
}

AugmentedSpace build_augmented(const AugmentationInputs& in, const CostModel& cm) {
  cm.validate();
  const std::size_t base = in.base_states();
  const std::size_t levels = in.survey_observations.size();
  if (base == 0 || levels == 0) throw ContractError("build_augmented: empty inputs");
  if (in.incidence.size() != base || in.sample_sizes.size() != levels) {
    throw ContractError("build_augmented: incidence or sample size mismatch");
  }
  for (const auto& o : in.survey_observations) {
    if (o.rows() != base || o.cols() != in.survey_observations.front().cols()) {
      throw ContractError("build_augmented: observation shape mismatch");
    }
  }

  AugmentedSpace space;
  space.base_states = base;
  space.survey_levels = levels;
  const std::size_t n = base * levels;
  auto& model = space.model;

  // Observation channel per survey level, replicated over the memory component.
  for (const auto& o : in.survey_observations) {
    DenseMatrix lifted(n, o.cols());
    for (std::size_t k = 0; k < levels; ++k) {
      for (std::size_t s = 0; s < base; ++s) {
        std::copy(o.row(s).begin(), o.row(s).end(), lifted.row(k * base + s).begin());
      }
    }
    model.observation_channels.push_back(std::move(lifted));
  }

  model.incidence.resize(n);
  for (std::size_t k = 0; k < levels; ++k) {
    std::copy(in.incidence.begin(), in.incidence.end(), model.incidence.begin() + static_cast<std::ptrdiff_t>(k * base));
  }

  PomdpModel::TransitionCost tc;
  tc.case_cost = cm.case_cost;
  for (std::size_t a_s = 0; a_s < in.base_transitions.size(); ++a_s) {
    const auto& t = in.base_transitions[a_s];
    for (std::size_t a_o = 0; a_o < levels; ++a_o) {
      const AugmentedAction action{a_s, a_o};
      space.joint.push_back(action);
      model.action_labels.push_back("vaccinate=" + std::to_string(a_s) + ";survey=" + std::to_string(a_o));
      model.channel_of_action.push_back(a_o);
      tc.action_cost.push_back(stage_cost(0.0, 0.0, action, in.sample_sizes[a_o], cm));

      std::vector<std::size_t> row_ptr(n + 1, 0);
      std::vector<CsrMatrix::Index> col_idx;
      std::vector<double> values;
      col_idx.reserve(t.nnz() * levels);
      values.reserve(t.nnz() * levels);
      for (std::size_t k = 0; k < levels; ++k) {
        for (std::size_t s = 0; s < base; ++s) {
          auto cols = t.row_cols(s);
          auto vals = t.row_values(s);
          for (std::size_t j = 0; j < cols.size(); ++j) {
            col_idx.push_back(static_cast<CsrMatrix::Index>(a_o * base + cols[j]));
            values.push_back(vals[j]);
          }
          row_ptr[k * base + s + 1] = col_idx.size();
        }
      }
      model.transitions.push_back(CsrMatrix::from_arrays(n, n, std::move(row_ptr), std::move(col_idx), std::move(values)));
    }
  }

  model.cost = DenseMatrix(n, space.joint.size());
  for (std::size_t j = 0; j < space.joint.size(); ++j) {
    const auto& t = in.base_transitions[space.joint[j].intervention];
    for (std::size_t s = 0; s < base; ++s) {
      auto cols = t.row_cols(s);
      auto vals = t.row_values(s);
      double acc = 0.0;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        acc += vals[c] * std::max(in.incidence[cols[c]] - in.incidence[s], 0.0);
      }
      const double expected = cm.case_cost * acc + tc.action_cost[j];
      for (std::size_t k = 0; k < levels; ++k) model.cost(k * base + s, j) = expected;
    }
  }
  model.transition_cost = std::move(tc);
  model.validate();
  return space;
}

AugmentedSpace restrict_to_no_survey(const AugmentedSpace& space) {
  AugmentedSpace out;
  out.base_states = space.base_states;
  out.survey_levels = space.survey_levels;
  const auto& src = space.model;
  auto& dst = out.model;
  dst.observation_channels = src.observation_channels;
  dst.incidence = src.incidence;
  dst.terminal = src.terminal;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < space.joint.size(); ++j) {
    if (space.joint[j].survey == 0) keep.push_back(j);
  }
  PomdpModel::TransitionCost tc;
  if (src.transition_cost) tc.case_cost = src.transition_cost->case_cost;
  dst.cost = DenseMatrix(src.states(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto j = keep[i];
    out.joint.push_back(space.joint[j]);
    dst.action_labels.push_back(src.action_labels[j]);
    dst.transitions.push_back(src.transitions[j]);
    dst.channel_of_action.push_back(src.channel_of_action[j]);
    if (src.transition_cost) tc.action_cost.push_back(src.transition_cost->action_cost[j]);
    for (std::size_t s = 0; s < src.states(); ++s) dst.cost(s, i) = src.cost(s, j);
  }
  if (src.transition_cost) dst.transition_cost = std::move(tc);
  return out;
}

VoiReport value_of_information(const AugmentationInputs& inputs, const CostModel& cm, const SolveSettings& settings,
                               const Belief& b0, const WitnessPlan* witnesses) {
  const auto full = build_augmented(inputs, cm);
  const auto restricted = restrict_to_no_survey(full);
  const Belief start = full.lift(b0);
  const auto full_sets = solve_pomdp(full.model, settings, witnesses);
  const auto restricted_sets = solve_pomdp(restricted.model, settings, witnesses);
  VoiReport r;
  r.value_full = full_sets.front().value(start);
  r.value_restricted = restricted_sets.front().value(start);
  r.value_of_information = r.value_restricted - r.value_full;
  return r;
}

}  // namespace epiplan
