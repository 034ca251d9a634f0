#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "epiplan/belief.hpp"
#include "epiplan/dp_solver.hpp"
#include "epiplan/epi_model.hpp"
#include "epiplan/pomdp.hpp"

namespace epiplan {

/// Decision rule driven through a rollout.
struct Policy {
  enum class Kind {
    closed_loop,    // greedy on the filtered belief against per-stage gamma sets
    open_loop,      // fixed action per step
    state_feedback  // MDP policy acting on the true state
  };
  Kind kind = Kind::open_loop;
  std::string name;
  std::vector<GammaSet> stages;
  std::vector<std::size_t> schedule;
  MdpSolution mdp;

  static Policy closed_loop(std::string name, std::vector<GammaSet> stages);
  static Policy open_loop(std::string name, std::vector<std::size_t> schedule);
  static Policy state_feedback(std::string name, MdpSolution solution);

  /// Throws ContractError if the policy cannot cover `horizon` steps.
  void check(std::size_t horizon, std::size_t actions) const;
};

struct RolloutStep {
  std::size_t state = 0;  // state before the step
  EpiState epi{};         // filled when a grid is supplied
  std::size_t action = 0;
  std::size_t channel = 0;  // observation channel of the action (survey level)
  std::size_t observation = 0;
  double cost = 0.0;
  std::size_t next_state = 0;
  double next_incidence = 0.0;
};

struct RolloutRecord {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::vector<RolloutStep> steps;
  double terminal_cost = 0.0;          // alpha^K times the terminal value of the final state
  double discounted_cost = 0.0;        // sum_{t=0}^{K-1} alpha^t c_t plus terminal_cost
  double discounted_infections = 0.0;  // sum_{t=1}^{K} alpha^t I_t
  bool failed = false;                 // impossible observation under the planner model
  std::string failure;
};

struct RolloutSetup {
  const PomdpModel* truth = nullptr;
  /// Model used for belief filtering; null means the true model.
  const PomdpModel* planner = nullptr;
  Belief initial;
  std::size_t horizon = 1;
  double discount = 1.0;
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  /// Optional grid for EpiState annotation; the grid cell is the flat state
  /// index modulo the grid size.
  const StateGrid* grid = nullptr;
  bool parallel = true;
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct RolloutSummary {
  std::size_t completed = 0;
  std::size_t failed = 0;
  Estimate cost;
  Estimate infections;
};

struct RolloutResult {
  std::vector<RolloutRecord> records;
  RolloutSummary summary;
};

/// Seed of repetition `rep`; independent of scheduling.
std::uint64_t rep_seed(std::uint64_t master, std::size_t rep);

RolloutResult rollout(const Policy& policy, const RolloutSetup& setup);

/// Recomputes the discounted totals of a record from its steps.
double audit_discounted_cost(const RolloutRecord& record, double discount);

Estimate estimate(const std::vector<double>& samples);

struct BudgetSpec {
  double total = 1.0;
  double coverage = 0.0;

  void validate() const;
};

struct SweepResult {
  std::vector<double> objective;  // index t - 1 for campaign step t
  std::size_t best_timing = 1;    // 1-based; ties go to the earliest
  std::size_t campaign_action = 0;
  double max_min_ratio() const;
};

/// Single-campaign schedules: action 0 everywhere except the campaign action on
/// the transition that produces step t. Objective sum_{t=1}^{K} alpha^t E[I_t]
/// by exact distribution propagation.
SweepResult sia_timing_sweep(const TransitionModel& model, const std::vector<double>& incidence,
                             const Belief& initial, const BudgetSpec& budget, std::size_t horizon,
                             double discount);

/// Schedule (action per step) of a single campaign at 1-based step t.
std::vector<std::size_t> campaign_schedule(std::size_t horizon, std::size_t timing, std::size_t campaign_action);

struct PolicyComparison {
  struct Row {
    std::string name;
    RolloutSummary summary;
    Estimate cost_difference;        // this policy minus the baseline, paired
    Estimate infection_difference;
    std::size_t paired = 0;
  };
  std::vector<Row> rows;  // rows[0] is the baseline
  std::vector<RolloutResult> results;
};

/// Runs every policy on the same repetition seeds and reports paired
/// differences against the first policy.
PolicyComparison compare_policies(const std::vector<Policy>& policies, const RolloutSetup& setup);

}  // namespace epiplan
