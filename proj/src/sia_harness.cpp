#include "epiplan/sia_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "epiplan/errors.hpp"

namespace epiplan {

namespace {

// 53-bit uniform in [0, 1); fixed formula so draws do not depend on the
// standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_sparse(const CsrMatrix& t, std::size_t row, double u) {
  auto cols = t.row_cols(row);
  auto vals = t.row_values(row);
  double total = 0.0;
  for (double v : vals) total += v;
  const double target = u * total;
  double acc = 0.0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    acc += vals[j];
    if (target < acc) return cols[j];
  }
  for (std::size_t j = cols.size(); j-- > 0;) {
    if (vals[j] > 0.0) return cols[j];
  }
  throw ContractError("rollout: empty transition row");
}

std::size_t sample_dense(std::span<const double> row, double u) {
  double total = 0.0;
  for (double v : row) total += v;
  const double target = u * total;
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (target < acc) return j;
  }
  for (std::size_t j = row.size(); j-- > 0;) {
    if (row[j] > 0.0) return j;
  }
  throw ContractError("rollout: empty distribution");
}

const GammaSet& stage_set(const Policy& p, std::size_t k) {
  return p.stages.size() == 1 ? p.stages.front() : p.stages[k];
}

const MdpSolution::Stage& mdp_stage(const Policy& p, std::size_t k) {
  return p.mdp.stationary ? p.mdp.stages.front() : p.mdp.stages[k];
}

RolloutRecord run_one(const Policy& policy, const RolloutSetup& setup, std::size_t rep) {
  const PomdpModel& truth = *setup.truth;
  const PomdpModel& planner = setup.planner ? *setup.planner : truth;
  RolloutRecord rec;
  rec.rep = rep;
  rec.seed = rep_seed(setup.seed, rep);
  std::mt19937_64 rng(rec.seed);

  // Common random numbers: one initial draw, then exactly two draws per step
  // whatever the policy does.
  std::size_t s = sample_dense(setup.initial.weights(), uniform01(rng));
  Belief b = setup.initial;
  double weight = 1.0;
  rec.steps.reserve(setup.horizon);
  for (std::size_t k = 0; k < setup.horizon; ++k) {
    const double u_next = uniform01(rng);
    const double u_obs = uniform01(rng);
    RolloutStep step;
    step.state = s;
    if (setup.grid) step.epi = setup.grid->representative(s % setup.grid->size());
    switch (policy.kind) {
      case Policy::Kind::closed_loop: step.action = greedy_action(b, stage_set(policy, k)).action; break;
      case Policy::Kind::open_loop: step.action = policy.schedule[k]; break;
      case Policy::Kind::state_feedback: step.action = mdp_stage(policy, k).actions[s]; break;
    }
    const std::size_t a = step.action;
    step.channel = truth.channel_of_action[a];
    step.next_state = sample_sparse(truth.transitions[a], s, u_next);
    step.observation = sample_dense(truth.observation(a).row(step.next_state), u_obs);
    step.cost = truth.realized_cost(s, a, step.next_state);
    step.next_incidence = truth.incidence_of(step.next_state);

    rec.discounted_cost += weight * step.cost;
    weight *= setup.discount;
    rec.discounted_infections += weight * step.next_incidence;
    s = step.next_state;
    rec.steps.push_back(step);

    if (policy.kind == Policy::Kind::closed_loop && !rec.failed) {
      try {
        b = update(predict(b, planner.transitions[a]), step.observation, planner.observation(a));
      } catch (const ImpossibleObservation& e) {
        rec.failed = true;
        rec.failure = e.what();
        break;
      }
    }
  }
  if (!rec.failed) {
    rec.terminal_cost = weight * truth.terminal_value(s);
    rec.discounted_cost += rec.terminal_cost;
  }
  return rec;
}

RolloutSummary summarize(const std::vector<RolloutRecord>& records) {
  RolloutSummary sum;
  std::vector<double> cost;
  std::vector<double> inf;
  for (const auto& r : records) {
    if (r.failed) {
      ++sum.failed;
      continue;
    }
    cost.push_back(r.discounted_cost);
    inf.push_back(r.discounted_infections);
  }
  sum.completed = cost.size();
  sum.cost = estimate(cost);
  sum.infections = estimate(inf);
  return sum;
}

}  // namespace

Policy Policy::closed_loop(std::string name, std::vector<GammaSet> stages) {
  Policy p;
  p.kind = Kind::closed_loop;
  p.name = std::move(name);
  p.stages = std::move(stages);
  return p;
}

Policy Policy::open_loop(std::string name, std::vector<std::size_t> schedule) {
  Policy p;
  p.kind = Kind::open_loop;
  p.name = std::move(name);
  p.schedule = std::move(schedule);
  return p;
}

Policy Policy::state_feedback(std::string name, MdpSolution solution) {
  Policy p;
  p.kind = Kind::state_feedback;
  p.name = std::move(name);
  p.mdp = std::move(solution);
  return p;
}

void Policy::check(std::size_t horizon, std::size_t actions) const {
  switch (kind) {
    case Kind::closed_loop:
      if (stages.empty() || (stages.size() != 1 && stages.size() < horizon)) {
        throw ContractError("policy '" + name + "' has fewer stages than the horizon");
      }
      for (const auto& set : stages) {
        if (set.vectors.empty()) throw ContractError("policy '" + name + "' has an empty stage");
        for (const auto& g : set.vectors) {
          if (g.action >= actions) throw ContractError("policy '" + name + "' references an unknown action");
        }
      }
      break;
    case Kind::open_loop:
      if (schedule.size() < horizon) throw ContractError("schedule '" + name + "' is shorter than the horizon");
      for (auto a : schedule) {
        if (a >= actions) throw ContractError("schedule '" + name + "' references an unknown action");
      }
      break;
    case Kind::state_feedback:
      if (mdp.stages.empty() || (!mdp.stationary && mdp.stages.size() < horizon)) {
        throw ContractError("policy '" + name + "' has fewer stages than the horizon");
      }
      for (const auto& st : mdp.stages) {
        for (auto a : st.actions) {
          if (a >= actions) throw ContractError("policy '" + name + "' references an unknown action");
        }
      }
      break;
  }
}

std::uint64_t rep_seed(std::uint64_t master, std::size_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(static_cast<std::uint64_t>(rep) >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

RolloutResult rollout(const Policy& policy, const RolloutSetup& setup) {
  if (!setup.truth) throw ContractError("rollout: no true model");
  const PomdpModel& truth = *setup.truth;
  const PomdpModel& planner = setup.planner ? *setup.planner : truth;
  if (planner.states() != truth.states() || planner.actions() != truth.actions() ||
      planner.observations() != truth.observations()) {
    throw ContractError("rollout: planner and true model dimensions differ");
  }
  if (setup.initial.size() != truth.states()) throw ContractError("rollout: initial belief dimension mismatch");
  if (!(setup.discount > 0.0 && setup.discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
  policy.check(setup.horizon, truth.actions());

  RolloutResult result;
  result.records.resize(setup.reps);
  const auto reps = static_cast<std::ptrdiff_t>(setup.reps);
  if (setup.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < reps; ++r) {
      result.records[static_cast<std::size_t>(r)] = run_one(policy, setup, static_cast<std::size_t>(r));
    }
  } else {
    for (std::ptrdiff_t r = 0; r < reps; ++r) {
      result.records[static_cast<std::size_t>(r)] = run_one(policy, setup, static_cast<std::size_t>(r));
    }
  }
  result.summary = summarize(result.records);
  return result;
}

double audit_discounted_cost(const RolloutRecord& record, double discount) {
  double total = 0.0;
  double weight = 1.0;
  for (const auto& step : record.steps) {
    total += weight * step.cost;
    weight *= discount;
  }
  return total + record.terminal_cost;
}

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  if (samples.empty()) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    e.standard_error = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  // Shifted by the first sample, so constant samples give exactly zero spread.
  const double shift = samples.front();
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x - shift;
  const double offset = sum / n;
  e.mean = shift + offset;
  if (samples.size() < 2) return e;
  double ss = 0.0;
  for (double x : samples) ss += (x - shift - offset) * (x - shift - offset);
  e.standard_error = std::sqrt(ss / (n - 1.0) / n);
  return e;
}

void BudgetSpec::validate() const {
  if (!(total >= 0.0) || !std::isfinite(total)) throw ConfigError("budget must be >= 0");
  if (!(coverage >= 0.0 && coverage <= 1.0)) throw ConfigError("campaign coverage must lie in [0, 1]");
  if (coverage > total) throw ConfigError("campaign coverage exceeds the budget");
}

double SweepResult::max_min_ratio() const {
  const auto [lo, hi] = std::minmax_element(objective.begin(), objective.end());
  return *hi / *lo;
}

std::vector<std::size_t> campaign_schedule(std::size_t horizon, std::size_t timing, std::size_t campaign_action) {
  if (timing < 1 || timing > horizon) throw ContractError("campaign_schedule: timing out of range");
  std::vector<std::size_t> schedule(horizon, 0);
  schedule[timing - 1] = campaign_action;
  return schedule;
}

SweepResult sia_timing_sweep(const TransitionModel& model, const std::vector<double>& incidence,
                             const Belief& initial, const BudgetSpec& budget, std::size_t horizon,
                             double discount) {
  budget.validate();
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
  if (incidence.size() != model.states() || initial.size() != model.states()) {
    throw ContractError("sia_timing_sweep: dimension mismatch");
  }
  auto it = std::find(model.coverage.begin(), model.coverage.end(), budget.coverage);
  if (it == model.coverage.end()) throw ConfigError("no intervention level matches the campaign coverage");

  SweepResult out;
  out.campaign_action = static_cast<std::size_t>(it - model.coverage.begin());
  out.objective.assign(horizon, 0.0);
  const std::vector<double> start(initial.weights().begin(), initial.weights().end());
  const auto timings = static_cast<std::ptrdiff_t>(horizon);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ti = 0; ti < timings; ++ti) {
    const std::size_t timing = static_cast<std::size_t>(ti) + 1;
    std::vector<double> d = start;
    double weight = 1.0;
    double total = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) {
      const std::size_t a = t == timing ? out.campaign_action : 0;
      d = model.matrices[a].left_multiply(d);
      weight *= discount;
      total += weight * dot(d, incidence);
    }
    out.objective[static_cast<std::size_t>(ti)] = total;
  }
  out.best_timing = 1;
  for (std::size_t t = 2; t <= horizon; ++t) {
    if (out.objective[t - 1] < out.objective[out.best_timing - 1]) out.best_timing = t;
  }
  return out;
}

PolicyComparison compare_policies(const std::vector<Policy>& policies, const RolloutSetup& setup) {
  if (policies.empty()) throw ContractError("compare_policies: no policies");
  PolicyComparison cmp;
  for (const auto& p : policies) cmp.results.push_back(rollout(p, setup));
  const auto& base = cmp.results.front().records;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    PolicyComparison::Row row;
    row.name = policies[i].name;
    row.summary = cmp.results[i].summary;
    std::vector<double> dc;
    std::vector<double> di;
    const auto& recs = cmp.results[i].records;
    for (std::size_t r = 0; r < recs.size(); ++r) {
      if (recs[r].failed || base[r].failed) continue;
      dc.push_back(recs[r].discounted_cost - base[r].discounted_cost);
      di.push_back(recs[r].discounted_infections - base[r].discounted_infections);
    }
    row.paired = dc.size();
    row.cost_difference = estimate(dc);
    row.infection_difference = estimate(di);
    cmp.rows.push_back(std::move(row));
  }
  return cmp;
}

}  // namespace epiplan
