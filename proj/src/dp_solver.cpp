#include "epiplan/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "epiplan/errors.hpp"
#include "epiplan/kernels.hpp"
#include "simplex.hpp"

namespace epiplan {

// ---------------------------------------------------------------------------
// Settings and helpers
// ---------------------------------------------------------------------------

void SolveSettings::validate() const {
  if (!infinite_horizon && horizon < 1) throw ConfigError("solver horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
  if (infinite_horizon && !(discount < 1.0)) throw ConfigError("infinite-horizon mode needs discount < 1");
  if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (witness_count < 1 || prune_grid_size < 1) throw ConfigError("witness and pruning grid sizes must be >= 1");
}

PruneMode SolveSettings::resolved_prune(std::size_t states) const {
  if (prune != PruneMode::automatic) return prune;
  return states <= lp_state_limit ? PruneMode::lp : PruneMode::grid;
}

double GammaSet::value(const Belief& b) const { return greedy_action(b, *this).value; }

namespace {

constexpr double kTieTolerance = 1e-12;

bool better(double value, std::size_t action, double best_value, std::size_t best_action) {
  const double tol = kTieTolerance * std::max(1.0, std::abs(best_value));
  if (value < best_value - tol) return true;
  return std::abs(value - best_value) <= tol && action < best_action;
}

std::vector<kernels::SparseVector> sparse_all(std::span<const Belief> beliefs) {
  std::vector<kernels::SparseVector> out;
  out.reserve(beliefs.size());
  for (const auto& b : beliefs) out.push_back(kernels::SparseVector::from_dense(b.weights()));
  return out;
}

std::vector<std::size_t> active_observations(const PomdpModel& model, std::size_t action) {
  const auto& o = model.observation(action);
  std::vector<std::size_t> obs;
  for (std::size_t j = 0; j < o.cols(); ++j) {
    if (!o.column_is_zero(j)) obs.push_back(j);
  }
  return obs;
}

std::vector<double> cost_column(const PomdpModel& model, std::size_t action) {
  std::vector<double> l(model.states());
  for (std::size_t s = 0; s < l.size(); ++s) l[s] = model.cost(s, action);
  return l;
}

void check_next(const GammaSet& next, const PomdpModel& model) {
  if (next.vectors.empty()) throw ContractError("backup: next-stage set is empty");
  for (const auto& v : next.vectors) {
    if (v.values.size() != model.states()) throw ContractError("backup: gamma-vector dimension mismatch");
  }
}

std::vector<std::vector<double>> values_of(const GammaSet& set) {
  std::vector<std::vector<double>> out;
  out.reserve(set.size());
  for (const auto& v : set.vectors) out.push_back(v.values);
  return out;
}

// l_a + discount * sum of the chosen projections.
std::vector<double> assemble(const std::vector<double>& immediate, double discount, const kernels::Projections& proj,
                             std::size_t n_next, const std::size_t* choice, std::size_t n_obs) {
  std::vector<double> future(immediate.size(), 0.0);
  for (std::size_t o = 0; o < n_obs; ++o) {
    const auto& g = proj[o * n_next + choice[o]];
    for (std::size_t s = 0; s < future.size(); ++s) future[s] += g[s];
  }
  std::vector<double> v(immediate.size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = immediate[s] + discount * future[s];
  return v;
}

// Distinct per-observation choice tuples, in first-witness order.
std::vector<std::vector<std::size_t>> unique_choices(const kernels::WitnessChoice& choice, std::size_t n_obs,
                                                     std::size_t n_witnesses) {
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t w = 0; w < n_witnesses; ++w) {
    std::vector<std::size_t> tuple(choice.begin() + static_cast<std::ptrdiff_t>(w * n_obs),
                                   choice.begin() + static_cast<std::ptrdiff_t>((w + 1) * n_obs));
    if (seen.insert(tuple).second) out.push_back(std::move(tuple));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LP pruning
// ---------------------------------------------------------------------------

bool dominates(const std::vector<double>& u, const std::vector<double>& v) {
  bool strict = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > v[i]) return false;
    if (u[i] < v[i]) strict = true;
  }
  return strict;
}

double scale_of(const std::vector<const std::vector<double>*>& vs) {
  double s = 1.0;
  for (const auto* v : vs) {
    for (double x : *v) s = std::max(s, std::abs(x));
  }
  return s;
}

// Largest margin by which w beats every member of `kept` somewhere on the
// simplex, and the belief attaining it.
std::pair<double, std::vector<double>> witness_margin(const std::vector<double>& w,
                                                      const std::vector<const std::vector<double>*>& kept) {
  const std::size_t dim = w.size();
  const std::size_t last = dim - 1;
  if (dim == 1) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto* u : kept) margin = std::min(margin, (*u)[0] - w[0]);
    return {margin, {1.0}};
  }
  double shift = 0.0;
  for (const auto* u : kept) shift = std::max(shift, w[last] - (*u)[last]);
  shift += 1.0;
  // Variables: b_0..b_{last-1}, t (margin = t - shift).
  DenseMatrix a(kept.size() + 1, dim);
  std::vector<double> rhs(kept.size() + 1);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& u = *kept[r];
    for (std::size_t i = 0; i < last; ++i) a(r, i) = (w[i] - u[i]) - (w[last] - u[last]);
    a(r, last) = 1.0;
    rhs[r] = (u[last] - w[last]) + shift;
  }
  for (std::size_t i = 0; i < last; ++i) a(kept.size(), i) = 1.0;
  rhs[kept.size()] = 1.0;
  std::vector<double> c(dim, 0.0);
  c[last] = 1.0;
  const auto lp = detail::maximize(a, rhs, c);
  if (lp.unbounded) throw SolverError("pruning LP unbounded");
  std::vector<double> b(dim, 0.0);
  double rest = 1.0;
  for (std::size_t i = 0; i < last; ++i) {
    b[i] = std::max(0.0, lp.x[i]);
    rest -= b[i];
  }
  b[last] = std::max(0.0, rest);
  return {lp.objective - shift, std::move(b)};
}

// Index (into `pool`) of the best vector at b; ties broken by smaller total
// then by position.
std::size_t best_at(const std::vector<const std::vector<double>*>& pool, const std::vector<std::size_t>& candidates,
                    const std::vector<double>& b) {
  std::size_t best = candidates.front();
  double best_value = std::numeric_limits<double>::infinity();
  double best_total = std::numeric_limits<double>::infinity();
  for (auto idx : candidates) {
    const auto& v = *pool[idx];
    const double value = dot(v, b);
    double total = 0.0;
    for (double x : v) total += x;
    const double tol = kTieTolerance * std::max(1.0, std::abs(best_value));
    if (value < best_value - tol || (std::abs(value - best_value) <= tol && total < best_total)) {
      best = idx;
      best_value = value;
      best_total = total;
    }
  }
  return best;
}

// Indices of the useful vectors, ascending.
std::vector<std::size_t> lp_useful(const std::vector<const std::vector<double>*>& pool) {
  const std::size_t n = pool.size();
  if (n <= 1) return std::vector<std::size_t>(n, 0);
  const std::size_t dim = pool.front()->size();
  const double eps = 1e-10 * scale_of(pool);

  // Duplicates and pointwise-dominated vectors never need an LP.
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < n && !drop; ++j) {
      if (j == i) continue;
      if (*pool[j] == *pool[i]) {
        drop = j < i;
      } else {
        drop = dominates(*pool[j], *pool[i]);
      }
    }
    if (!drop) work.push_back(i);
  }

  std::vector<std::size_t> kept;
  auto take = [&](std::size_t idx) {
    kept.push_back(idx);
    work.erase(std::find(work.begin(), work.end(), idx));
  };
  for (std::size_t s = 0; s < dim && !work.empty(); ++s) {
    std::vector<double> vertex(dim, 0.0);
    vertex[s] = 1.0;
    // Only the best vector over everything seen so far is certainly useful.
    std::vector<std::size_t> all = work;
    all.insert(all.end(), kept.begin(), kept.end());
    const auto idx = best_at(pool, all, vertex);
    if (std::find(work.begin(), work.end(), idx) != work.end()) take(idx);
  }
  while (!work.empty()) {
    const auto candidate = work.front();
    std::vector<const std::vector<double>*> kept_vectors;
    kept_vectors.reserve(kept.size());
    for (auto k : kept) kept_vectors.push_back(pool[k]);
    auto [margin, b] = witness_margin(*pool[candidate], kept_vectors);
    if (margin > eps) {
      take(best_at(pool, work, b));
    } else {
      work.erase(work.begin());
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::vector<double>> lp_filter(std::vector<std::vector<double>> vectors) {
  std::vector<const std::vector<double>*> pool;
  pool.reserve(vectors.size());
  for (const auto& v : vectors) pool.push_back(&v);
  std::vector<std::vector<double>> out;
  for (auto idx : lp_useful(pool)) out.push_back(std::move(vectors[idx]));
  return out;
}

}  // namespace

GammaSet prune_lp(const GammaSet& set) {
  std::vector<const std::vector<double>*> pool;
  pool.reserve(set.size());
  for (const auto& v : set.vectors) pool.push_back(&v.values);
  GammaSet out{set.stage, {}};
  for (auto idx : lp_useful(pool)) out.vectors.push_back(set.vectors[idx]);
  return out;
}

GammaSet prune_dominated(const GammaSet& set, std::span<const Belief> grid) {
  if (grid.empty()) throw ContractError("prune_dominated: empty belief grid");
  const std::size_t n = set.size();
  std::vector<bool> unique(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i && unique[i]; ++j) {
      if (unique[j] && set.vectors[j].values == set.vectors[i].values) unique[i] = false;
    }
  }
  std::vector<bool> keep(n, false);
  const auto sparse = sparse_all(grid);
  for (const auto& b : sparse) {
    std::size_t best = n;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!unique[i]) continue;
      const double v = b.dot(set.vectors[i].values);
      if (best == n || better(v, set.vectors[i].action, best_value, set.vectors[best].action)) {
        best = i;
        best_value = v;
      }
    }
    if (best < n) keep[best] = true;
  }
  GammaSet out{set.stage, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < n && !dominated; ++j) {
      if (j != i && keep[j]) dominated = dominates(set.vectors[j].values, set.vectors[i].values);
    }
    if (!dominated) out.vectors.push_back(set.vectors[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Witness beliefs
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, std::uint32_t base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Belief> low_discrepancy_beliefs(std::size_t states, std::size_t count) {
  if (states == 0) throw ContractError("low_discrepancy_beliefs: empty state space");
  std::vector<Belief> out;
  for (std::size_t s = 0; s < states && out.size() < count; ++s) out.push_back(Belief::point_mass(states, s));
  if (out.size() < count && states > 1) out.push_back(Belief::uniform(states));
  const auto primes = first_primes(states);
  for (std::uint64_t i = 1; out.size() < count; ++i) {
    std::vector<double> w(states);
    double total = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      w[s] = -std::log(radical_inverse(i, primes[s]));
      total += w[s];
    }
    for (double& x : w) x /= total;
    out.emplace_back(std::move(w));
  }
  return out;
}

namespace {

std::size_t sample_index(std::span<const double> weights, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

std::size_t sample_row(const CsrMatrix& m, std::size_t row, double u) {
  const auto cols = m.row_cols(row);
  return cols[sample_index(m.row_values(row), u)];
}

}  // namespace

WitnessPlan sample_reachable_beliefs(const PomdpModel& model, const Belief& b0, std::size_t horizon,
                                     std::size_t trajectories, std::uint64_t seed) {
  if (b0.size() != model.states()) throw ContractError("sample_reachable_beliefs: belief dimension mismatch");
  WitnessPlan plan;
  plan.per_stage.assign(std::max<std::size_t>(horizon, 1), {});
  std::vector<std::set<std::vector<double>>> seen(plan.per_stage.size());
  auto record = [&](std::size_t k, const Belief& b) {
    std::vector<double> w(b.weights().begin(), b.weights().end());
    if (seen[k].insert(w).second) plan.per_stage[k].push_back(b);
  };
  record(0, b0);
  for (std::size_t j = 0; j < trajectories; ++j) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(j)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, model.actions() - 1);
    Belief b = b0;
    std::size_t s = sample_index(b0.weights(), unit(rng));
    for (std::size_t k = 0; k + 1 < horizon; ++k) {
      // The first |A| trajectories hold one action throughout.
      const std::size_t a = j < model.actions() ? j : pick(rng);
      const std::size_t s_next = sample_row(model.transitions[a], s, unit(rng));
      const auto& obs = model.observation(a);
      const std::size_t o = sample_index(obs.row(s_next), unit(rng));
      try {
        b = update(predict(b, model.transitions[a]), o, obs);
      } catch (const ImpossibleObservation&) {
        break;
      }
      s = s_next;
      record(k + 1, b);
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// MDP solvers
// ---------------------------------------------------------------------------

namespace {

void check_mdp(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost) {
  if (transitions.empty()) throw ContractError("MDP: no actions");
  const std::size_t n = transitions.front().rows();
  for (const auto& t : transitions) {
    if (t.rows() != n || t.cols() != n) throw ContractError("MDP: transition shape mismatch");
  }
  if (cost.rows() != n || cost.cols() != transitions.size()) throw ContractError("MDP: cost table shape mismatch");
  for (double v : cost.data()) {
    if (!std::isfinite(v)) throw ContractError("MDP: non-finite cost");
  }
}

// Greedy Bellman step: returns min_a Q and the argmin (lowest index on ties).
MdpSolution::Stage bellman(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost, double discount,
                           const std::vector<double>& next) {
  const std::size_t n = cost.rows();
  MdpSolution::Stage stage{std::vector<double>(n), std::vector<std::size_t>(n, 0)};
  std::vector<std::vector<double>> expected;
  expected.reserve(transitions.size());
  for (const auto& t : transitions) expected.push_back(t.right_multiply(next));
  for (std::size_t s = 0; s < n; ++s) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t a = 0; a < transitions.size(); ++a) {
      const double q = cost(s, a) + discount * expected[a][s];
      if (better(q, a, best, arg) || a == 0) {
        best = q;
        arg = a;
      }
    }
    stage.values[s] = best;
    stage.actions[s] = arg;
  }
  return stage;
}

}  // namespace

MdpSolution mdp_value_iteration(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost,
                                const SolveSettings& settings, std::span<const double> terminal) {
  settings.validate();
  check_mdp(transitions, cost);
  const std::size_t n = cost.rows();
  if (!terminal.empty() && terminal.size() != n) throw ContractError("MDP: terminal size mismatch");
  std::vector<double> next = terminal.empty() ? std::vector<double>(n, 0.0)
                                              : std::vector<double>(terminal.begin(), terminal.end());
  MdpSolution sol;
  if (!settings.infinite_horizon) {
    sol.stages.resize(settings.horizon);
    for (std::size_t k = settings.horizon; k-- > 0;) {
      sol.stages[k] = bellman(transitions, cost, settings.discount, next);
      next = sol.stages[k].values;
    }
    sol.iterations = settings.horizon;
    return sol;
  }
  sol.stationary = true;
  for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
    auto stage = bellman(transitions, cost, settings.discount, next);
    double change = 0.0;
    for (std::size_t s = 0; s < n; ++s) change = std::max(change, std::abs(stage.values[s] - next[s]));
    next = stage.values;
    sol.iterations = it;
    sol.residual = change;
    if (change < settings.tolerance) {
      sol.stages = {std::move(stage)};
      return sol;
    }
  }
  throw SolverError("value iteration did not converge; residual " + std::to_string(sol.residual));
}

namespace {

std::vector<double> evaluate_policy(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost,
                                    double discount, const std::vector<std::size_t>& policy) {
  const auto n = static_cast<Eigen::Index>(cost.rows());
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto a = policy[static_cast<std::size_t>(s)];
    const auto& t = transitions[a];
    triplets.emplace_back(s, s, 1.0);
    auto cols = t.row_cols(static_cast<std::size_t>(s));
    auto vals = t.row_values(static_cast<std::size_t>(s));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      triplets.emplace_back(s, static_cast<Eigen::Index>(cols[k]), -discount * vals[k]);
    }
    rhs[s] = cost(static_cast<std::size_t>(s), a);
  }
  Eigen::SparseMatrix<double> system(n, n);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw SolverError("policy evaluation system is singular");
  Eigen::VectorXd v = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !v.allFinite()) throw SolverError("policy evaluation solve failed");
  return {v.data(), v.data() + n};
}

}  // namespace

MdpSolution mdp_policy_iteration(const std::vector<CsrMatrix>& transitions, const DenseMatrix& cost,
                                 const SolveSettings& settings) {
  settings.validate();
  check_mdp(transitions, cost);
  if (!(settings.discount < 1.0)) throw ConfigError("policy iteration needs discount < 1");
  const std::size_t n = cost.rows();
  // Start from the myopic policy.
  std::vector<std::size_t> policy(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 1; a < transitions.size(); ++a) {
      if (cost(s, a) < cost(s, policy[s])) policy[s] = a;
    }
  }
  MdpSolution sol;
  sol.stationary = true;
  auto values = evaluate_policy(transitions, cost, settings.discount, policy);
  for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
    std::vector<std::vector<double>> expected;
    for (const auto& t : transitions) expected.push_back(t.right_multiply(values));
    bool changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      const auto q = [&](std::size_t a) { return cost(s, a) + settings.discount * expected[a][s]; };
      std::size_t best = policy[s];
      for (std::size_t a = 0; a < transitions.size(); ++a) {
        const double margin = 1e-12 * std::max(1.0, std::abs(q(best)));
        if (q(a) < q(best) - margin) best = a;
      }
      if (best != policy[s]) {
        policy[s] = best;
        changed = true;
      }
    }
    sol.iterations = it;
    if (!changed) {
      sol.stages = {{std::move(values), std::move(policy)}};
      return sol;
    }
    auto improved = evaluate_policy(transitions, cost, settings.discount, policy);
    for (std::size_t s = 0; s < n; ++s) {
      if (improved[s] > values[s] + 1e-9 * std::max(1.0, std::abs(values[s]))) {
        throw SolverError("policy improvement increased the value of state " + std::to_string(s));
      }
    }
    values = std::move(improved);
  }
  throw SolverError("policy iteration did not terminate within max_iterations");
}

// ---------------------------------------------------------------------------
// POMDP backups
// ---------------------------------------------------------------------------

GammaSet pomdp_backup_exact(const GammaSet& next, const PomdpModel& model, const SolveSettings& settings,
                            std::span<const Belief> grid, BackupReport* report) {
  check_next(next, model);
  const PruneMode mode = settings.resolved_prune(model.states());
  if (mode == PruneMode::grid && grid.empty()) throw ContractError("grid pruning needs witness beliefs");
  const auto next_values = values_of(next);
  const std::size_t n_next = next_values.size();
  const auto sparse_grid = mode == PruneMode::grid ? sparse_all(grid) : std::vector<kernels::SparseVector>{};

  GammaSet out{next.stage > 0 ? next.stage - 1 : 0, {}};
  double cross_sum = 0.0;
  for (std::size_t a = 0; a < model.actions(); ++a) {
    const auto obs = active_observations(model, a);
    const auto immediate = cost_column(model, a);
    const auto proj = kernels::project(model.transitions[a], model.observation(a), obs, next_values);
    cross_sum += std::pow(static_cast<double>(n_next), static_cast<double>(obs.size()));

    if (mode == PruneMode::grid) {
      const auto choice = kernels::witness_argmin(proj, obs.size(), n_next, sparse_grid);
      for (const auto& tuple : unique_choices(choice, obs.size(), sparse_grid.size())) {
        out.vectors.push_back({assemble(immediate, settings.discount, proj, n_next, tuple.data(), obs.size()), a});
      }
      continue;
    }

    // Incremental cross-sum over observations, pruning after each step in lp mode.
    auto slice = [&](std::size_t o) {
      std::vector<std::vector<double>> p(proj.begin() + static_cast<std::ptrdiff_t>(o * n_next),
                                         proj.begin() + static_cast<std::ptrdiff_t>((o + 1) * n_next));
      return mode == PruneMode::lp ? lp_filter(std::move(p)) : p;
    };
    auto acc = slice(0);
    for (std::size_t o = 1; o < obs.size(); ++o) {
      const auto term = slice(o);
      std::vector<std::vector<double>> sum;
      sum.reserve(acc.size() * term.size());
      for (const auto& x : acc) {
        for (const auto& y : term) {
          std::vector<double> z(x.size());
          for (std::size_t s = 0; s < z.size(); ++s) z[s] = x[s] + y[s];
          sum.push_back(std::move(z));
        }
      }
      acc = mode == PruneMode::lp ? lp_filter(std::move(sum)) : std::move(sum);
    }
    for (auto& future : acc) {
      for (std::size_t s = 0; s < future.size(); ++s) future[s] = immediate[s] + settings.discount * future[s];
      out.vectors.push_back({std::move(future), a});
    }
  }

  if (mode == PruneMode::lp) {
    out = prune_lp(out);
  } else if (mode == PruneMode::grid) {
    out = prune_dominated(out, grid);
  }
  if (report != nullptr) {
    report->cross_sum_size = cross_sum;
    report->kept = out.size();
  }
  return out;
}

GammaSet pomdp_backup_reduced(const GammaSet& next, const PomdpModel& model, const SolveSettings& settings,
                              std::span<const Belief> witnesses) {
  check_next(next, model);
  if (witnesses.empty()) throw ContractError("reduced backup needs at least one witness belief");
  const auto next_values = values_of(next);
  const std::size_t n_next = next_values.size();
  const auto sparse = sparse_all(witnesses);

  GammaSet out{next.stage > 0 ? next.stage - 1 : 0, {}};
  for (std::size_t a = 0; a < model.actions(); ++a) {
    const auto obs = active_observations(model, a);
    const auto immediate = cost_column(model, a);
    const auto proj = kernels::project(model.transitions[a], model.observation(a), obs, next_values);
    const auto choice = kernels::witness_argmin(proj, obs.size(), n_next, sparse);
    std::vector<double> best;
    double best_mean = std::numeric_limits<double>::infinity();
    for (const auto& tuple : unique_choices(choice, obs.size(), sparse.size())) {
      auto v = assemble(immediate, settings.discount, proj, n_next, tuple.data(), obs.size());
      double mean = 0.0;
      for (const auto& w : sparse) mean += w.dot(v);
      mean /= static_cast<double>(sparse.size());
      if (mean < best_mean) {
        best_mean = mean;
        best = std::move(v);
      }
    }
    out.vectors.push_back({std::move(best), a});
  }
  return out;
}

std::vector<GammaSet> solve_pomdp(const PomdpModel& model, const SolveSettings& settings,
                                  const WitnessPlan* witnesses) {
  settings.validate();
  model.validate();
  const std::size_t n = model.states();
  const PruneMode mode = settings.resolved_prune(n);

  WitnessPlan generated;
  const bool needs_witnesses =
      settings.backup == BackupMode::reduced || mode == PruneMode::grid || settings.infinite_horizon;
  if (witnesses == nullptr && needs_witnesses) {
    const std::size_t count =
        settings.backup == BackupMode::reduced ? settings.witness_count : settings.prune_grid_size;
    generated.per_stage = {low_discrepancy_beliefs(n, count)};
    witnesses = &generated;
  }

  GammaSet terminal;
  terminal.stage = settings.infinite_horizon ? 0 : settings.horizon;
  terminal.vectors.push_back({model.terminal.empty() ? std::vector<double>(n, 0.0) : model.terminal, kNoAction});

  auto backup = [&](const GammaSet& next, std::size_t stage) {
    std::span<const Belief> w;
    if (witnesses != nullptr) w = witnesses->for_stage(stage);
    GammaSet set = settings.backup == BackupMode::reduced ? pomdp_backup_reduced(next, model, settings, w)
                                                          : pomdp_backup_exact(next, model, settings, w);
    set.stage = stage;
    return set;
  };

  if (!settings.infinite_horizon) {
    std::vector<GammaSet> stages(settings.horizon);
    const GammaSet* next = &terminal;
    for (std::size_t k = settings.horizon; k-- > 0;) {
      stages[k] = backup(*next, k);
      next = &stages[k];
    }
    return stages;
  }

  const auto& grid = witnesses->for_stage(0);
  GammaSet current = terminal;
  for (std::size_t it = 0; it < settings.max_iterations; ++it) {
    GammaSet updated = backup(current, 0);
    double change = 0.0;
    for (const auto& b : grid) change = std::max(change, std::abs(updated.value(b) - current.value(b)));
    current = std::move(updated);
    if (change < settings.tolerance) return {current};
  }
  throw SolverError("infinite-horizon POMDP iteration did not converge");
}

GreedyChoice greedy_action(const Belief& b, const GammaSet& set) {
  if (set.vectors.empty()) throw ContractError("greedy_action: empty gamma set");
  if (b.size() != set.dimension()) throw ContractError("greedy_action: belief dimension mismatch");
  std::vector<std::size_t> support;
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (b[s] != 0.0) support.push_back(s);
  }
  GreedyChoice best{kNoAction, std::numeric_limits<double>::infinity()};
  bool first = true;
  for (const auto& v : set.vectors) {
    double value = 0.0;
    for (auto s : support) value += v.values[s] * b[s];
    if (first || better(value, v.action, best.value, best.action)) {
      best = {v.action, value};
      first = false;
    }
  }
  return best;
}

namespace {

double expectimax(const std::vector<double>& b, const PomdpModel& model, std::size_t steps, double discount) {
  const std::size_t n = b.size();
  if (steps == 0) {
    double v = 0.0;
    for (std::size_t s = 0; s < n; ++s) v += model.terminal_value(s) * b[s];
    return v;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < model.actions(); ++a) {
    double value = 0.0;
    for (std::size_t s = 0; s < n; ++s) value += model.cost(s, a) * b[s];
    const auto pred = model.transitions[a].left_multiply(b);
    const auto& obs = model.observation(a);
    double future = 0.0;
    for (std::size_t o = 0; o < obs.cols(); ++o) {
      std::vector<double> post(n);
      double mass = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        post[s] = obs(s, o) * pred[s];
        mass += post[s];
      }
      if (!(mass > 0.0)) continue;
      for (double& x : post) x /= mass;
      future += mass * expectimax(post, model, steps - 1, discount);
    }
    best = std::min(best, value + discount * future);
  }
  return best;
}

}  // namespace

double evaluate_exact_tree(const Belief& b0, const PomdpModel& model, std::size_t horizon, double discount) {
  if (b0.size() != model.states()) throw ContractError("evaluate_exact_tree: belief dimension mismatch");
  const double branching = static_cast<double>(model.actions() * model.observations());
  if (std::pow(branching, static_cast<double>(horizon)) > kExpectimaxLeafLimit) {
    throw SolverError("evaluate_exact_tree: tree too large for brute-force evaluation");
  }
  std::vector<double> b(b0.weights().begin(), b0.weights().end());
  return expectimax(b, model, horizon, discount);
}

}  // namespace epiplan
