#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "epiplan/belief.hpp"
#include "epiplan/matrix.hpp"
#include "epiplan/pomdp.hpp"

namespace epiplan {

inline constexpr std::size_t kNoAction = std::numeric_limits<std::size_t>::max();

/// State-indexed hyperplane of a piecewise-linear (concave, cost-minimizing)
/// value function, tagged with the action it recommends.
struct GammaVector {
  std::vector<double> values;
  std::size_t action = kNoAction;

  bool operator==(const GammaVector&) const = default;
};

/// V(b) = min over members of <gamma, b>.
struct GammaSet {
  std::size_t stage = 0;
  std::vector<GammaVector> vectors;

  std::size_t size() const noexcept { return vectors.size(); }
  std::size_t dimension() const noexcept { return vectors.empty() ? 0 : vectors.front().values.size(); }
  double value(const Belief& b) const;

  bool operator==(const GammaSet&) const = default;
};

enum class BackupMode { exact, reduced };

/// How exact backups discard useless vectors.
///  - lp: witness linear programs; the result is the exact minimal set.
///  - grid: pointwise dominance plus witness-belief filtering; exact at the
///    witness beliefs only.
///  - none: keep the full cross-sum (tiny instances and tests).
///  - automatic: lp for small state spaces, grid otherwise.
enum class PruneMode { automatic, lp, grid, none };

struct SolveSettings {
  std::size_t horizon = 1;
  double discount = 1.0;
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
  BackupMode backup = BackupMode::exact;
  PruneMode prune = PruneMode::automatic;
  std::size_t witness_count = 64;
  std::size_t prune_grid_size = 512;
  bool infinite_horizon = false;
  /// automatic pruning switches from lp to grid above this state count.
  std::size_t lp_state_limit = 16;

  void validate() const;
  PruneMode resolved_prune(std::size_t states) const;
};

/// Per-stage value and action tables of an MDP solution. Finite-horizon
/// solutions carry K stages (stage k has K - k steps to go); stationary
/// solutions carry one.
struct MdpSolution {
  struct Stage {
    std::vector<double> values;
    std::vector<std::size_t> actions;

    bool operator==(const Stage&) const = default;
  };
  std::vector<Stage> stages;
  bool stationary = false;
  std::size_t iterations = 0;
  double residual = 0.0;

  bool operator==(const MdpSolution&) const = default;
};

/// Witness beliefs used by grid pruning and the reduced backup. Either one
/// shared set or one set per stage (stage k uses per_stage[k]).
struct WitnessPlan {
  std::vector<std::vector<Belief>> per_stage;

  const std::vector<Belief>& for_stage(std::size_t k) const {
    return per_stage.size() == 1 ? per_stage.front() : per_stage.at(k);
  }
};

/// Simplex vertices, the centroid and Halton points mapped to the simplex.
std::vector<Belief> low_discrepancy_beliefs(std::size_t states, std::size_t count);

/// Beliefs reachable from b0 in k steps under uniformly random actions and
/// sampled observations, k = 0..horizon-1. Deduplicated, deterministic in seed.
WitnessPlan sample_reachable_beliefs(const PomdpModel& model, const Belief& b0, std::size_t horizon,
                                     std::size_t trajectories, std::uint64_t seed);

MdpSolution mdp_value_iteration(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost,
                                const SolveSettings& settings, std::span<const double> terminal = {});

/// Howard policy iteration with exact sparse LU evaluation; needs discount < 1.
MdpSolution mdp_policy_iteration(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost,
                                 const SolveSettings& settings);

struct BackupReport {
  /// Size of the unpruned cross-sum, sum over actions of |next|^|O_a| where O_a
  /// are the observations reachable under a.
  double cross_sum_size = 0.0;
  std::size_t kept = 0;
};

GammaSet pomdp_backup_exact(const GammaSet& next, const PomdpModel& model, const SolveSettings& settings,
                            std::span<const Belief> grid, BackupReport* report = nullptr);

/// At most one vector per action: among the action's cross-sum candidates that
/// are optimal at some witness, the one with the lowest mean witness value.
GammaSet pomdp_backup_reduced(const GammaSet& next, const PomdpModel& model, const SolveSettings& settings,
                              std::span<const Belief> witnesses);

/// Drops duplicates, vectors not minimal at any grid belief, and survivors that
/// are pointwise dominated by another survivor. min <gamma, b> over the grid is
/// unchanged.
GammaSet prune_dominated(const GammaSet& set, std::span<const Belief> grid);

/// Exact minimal-set pruning via witness linear programs (Lark's filter).
GammaSet prune_lp(const GammaSet& set);

/// Backward recursion from the terminal values; returns stages 0..K-1. In
/// infinite-horizon mode returns the single stationary set.
std::vector<GammaSet> solve_pomdp(const PomdpModel& model, const SolveSettings& settings,
                                  const WitnessPlan* witnesses = nullptr);

struct GreedyChoice {
  std::size_t action = kNoAction;
  double value = 0.0;
};

/// Minimizing vector at b; ties (relative 1e-12) go to the lowest action index.
GreedyChoice greedy_action(const Belief& b, const GammaSet& set);

/// Refuses trees with more than this many (action, observation) leaves.
inline constexpr double kExpectimaxLeafLimit = 1e7;

/// Brute-force expectimax over the action/observation tree.
double evaluate_exact_tree(const Belief& b0, const PomdpModel& model, std::size_t horizon, double discount);

}  // namespace epiplan
