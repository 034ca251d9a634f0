// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "epiplan/cli.hpp"
#include "support.hpp"

using namespace epiplan;
namespace fs = std::filesystem;
using testing::random_belief;
using testing::random_pomdp;
using testing::random_stochastic;
using testing::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

SolveSettings finite(std::size_t horizon, double discount) {
  SolveSettings s;
  s.horizon = horizon;
  s.discount = discount;
  return s;
}

const std::string kToyConfig = EPIPLAN_SOURCE_DIR "/configs/toy.json";
const std::string kCalibrateConfig = EPIPLAN_SOURCE_DIR "/configs/toy_calibrate.json";

struct ScratchDir {
  ScratchDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("epiplan_accept_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  fs::path path;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    rows.push_back(std::move(f));
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

// 1. Exact solve against the expectimax tree.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  std::size_t instances = 0;
  for (std::size_t states = 2; states <= 4; ++states) {
    for (std::size_t actions = 2; actions <= 3; ++actions) {
      const std::size_t horizon = 1 + (states + actions) % 4;
      const double discount = testing::uniform(rng, 0.8, 1.0);
      const auto m = random_pomdp(states, actions, 2, rng);
      const auto stages = solve_pomdp(m, finite(horizon, discount));
      for (int k = 0; k < 200; ++k) {
        const auto b = random_belief(states, rng);
        worst = std::max(worst, std::abs(stages[0].value(b) - evaluate_exact_tree(b, m, horizon, discount)));
      }
      ++instances;
    }
  }
  const double secs = seconds_since(t0);
  return {instances >= 5 && worst <= 1e-8 && secs < 10.0,
          num(instances) + " instances x 200 beliefs, max |diff| " + num(worst) + ", " + num(secs) + " s"};
}

// 2. Value iteration against policy iteration.
Outcome mdp_cross_check() {
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CsrMatrix> t;
    for (int a = 0; a < 3; ++a) t.push_back(random_stochastic(20, 20, rng, 0.3));
    DenseMatrix c(20, 3);
    for (std::size_t s = 0; s < 20; ++s) {
      for (std::size_t a = 0; a < 3; ++a) c(s, a) = testing::uniform(rng);
    }
    SolveSettings s;
    s.discount = 0.95;
    s.infinite_horizon = true;
    s.tolerance = 1e-10;
    const auto vi = mdp_value_iteration(t, c, s);
    const auto pi = mdp_policy_iteration(t, c, s);
    for (std::size_t i = 0; i < 20; ++i) {
      worst = std::max(worst, std::abs(vi.stages[0].values[i] - pi.stages[0].values[i]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 5.0, "10 MDPs 20x3, max |VI - PI| " + num(worst) + ", " + num(secs) + " s"};
}

// 3. Delta observations on the toy chain reduce the POMDP to the MDP.
Outcome perfect_observation() {
  const auto p = testing::toy_params();
  const auto g = build_grid(p, 2, 3);
  const auto t = build_transition(g, p, InterventionSet{{0.0, 0.5}}, 8);
  PomdpModel m;
  m.transitions = t.matrices;
  m.observation_channels = {delta_observation(g.size())};
  m.channel_of_action = {0, 0};
  m.action_labels = {"none", "campaign"};
  m.incidence = g.incidence();
  m.cost = DenseMatrix(g.size(), 2);
  const CostModel cm{1.0, 2.0, 0.0, 0.95};
  for (std::size_t s = 0; s < g.size(); ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      double expected = 0.0;
      const auto cols = t.matrices[a].row_cols(s);
      const auto vals = t.matrices[a].row_values(s);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        expected += vals[k] * std::max(m.incidence[cols[k]] - m.incidence[s], 0.0);
      }
      m.cost(s, a) = cm.case_cost * expected + cm.vaccination_cost * t.coverage[a];
    }
  }
  const std::size_t horizon = 3;
  auto settings = finite(horizon, cm.discount);
  settings.prune = PruneMode::grid;
  const auto pomdp = solve_pomdp(m, settings);
  const auto mdp = mdp_value_iteration(m.transitions, m.cost, settings);
  double worst = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    for (std::size_t s = 0; s < g.size(); ++s) {
      worst = std::max(worst, std::abs(pomdp[k].value(Belief::point_mass(g.size(), s)) - mdp.stages[k].values[s]));
    }
  }
  return {worst <= 1e-8, num(g.size()) + " toy states, " + num(horizon) + " stages, max |diff| " + num(worst)};
}

// 4. Total probability and null-survey idempotence.
Outcome filter_identities() {
  Rng rng(404);
  const auto p = testing::toy_params();
  const auto g = build_grid(p, 3, 4);
  const auto t = build_transition(g, p, InterventionSet{{0.0, 0.5}}, 8);
  const auto om = build_observation(g, SurveyDesign{{0.0, 0.05}, 4}, {0.9, 0.95});
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto b = random_belief(g.size(), rng);
    const auto pred = predict(b, draw % 2, t);
    // Mixture of posteriors recovers the prediction.
    const auto marg = obs_marginal(pred, 1, om);
    std::vector<double> mix(g.size(), 0.0);
    for (std::size_t o = 0; o < marg.size(); ++o) {
      if (marg[o] <= 0.0) continue;
      const auto post = update(pred, o, 1, om);
      for (std::size_t s = 0; s < g.size(); ++s) mix[s] += marg[o] * post[s];
    }
    double total = 0.0;
    for (std::size_t s = 0; s < g.size(); ++s) {
      worst = std::max(worst, std::abs(mix[s] - pred[s]));
    }
    for (double x : marg) total += x;
    worst = std::max(worst, std::abs(total - 1.0));
    // The null survey returns the prediction unchanged.
    const auto null_post = update(pred, SurveyDesign::kNullObservation, 0, om);
    for (std::size_t s = 0; s < g.size(); ++s) worst = std::max(worst, std::abs(null_post[s] - pred[s]));
  }
  return {worst <= 1e-9, "100 draws on " + num(g.size()) + " states, max deviation " + num(worst)};
}

// Small augmentation inputs: `states` base states, two intervention levels and
// a survey level with two outcomes.
AugmentationInputs voi_inputs(std::size_t states, Rng& rng, bool informative) {
  AugmentationInputs in;
  in.base_transitions = {random_stochastic(states, states, rng), random_stochastic(states, states, rng)};
  DenseMatrix null_obs(states, 3);
  DenseMatrix survey(states, 3);
  for (std::size_t s = 0; s < states; ++s) {
    null_obs(s, 0) = 1.0;
    const double q = informative ? testing::uniform(rng, 0.05, 0.95) : 0.4;
    survey(s, 1) = 1.0 - q;
    survey(s, 2) = q;
  }
  in.survey_observations = {null_obs, survey};
  for (std::size_t s = 0; s < states; ++s) in.incidence.push_back(testing::uniform(rng, 0.0, 20.0));
  in.sample_sizes = {0, 20};
  return in;
}

// 5. Free surveys never hurt; uninformative surveys are worth exactly nothing.
Outcome voi_sign() {
  Rng rng(505);
  double lowest = std::numeric_limits<double>::infinity();
  double highest = -lowest;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t states = 2 + static_cast<std::size_t>(trial) % 3;
    const auto in = voi_inputs(states, rng, true);
    const CostModel cm{1.0, testing::uniform(rng, 0.0, 5.0), 0.0, 0.95};
    const auto r = value_of_information(in, cm, finite(3, cm.discount), random_belief(states, rng));
    lowest = std::min(lowest, r.value_of_information);
    highest = std::max(highest, r.value_of_information);
  }
  const auto flat = voi_inputs(3, rng, false);
  const auto u = value_of_information(flat, {1.0, 1.0, 0.0, 0.95}, finite(3, 0.95), random_belief(3, rng));
  const bool ok = lowest >= -1e-8 && std::abs(u.value_of_information) <= 1e-8;
  return {ok, "VoI over 5 instances in [" + num(lowest) + ", " + num(highest) + "], uninformative VoI " + num(u.value_of_information)};
}

// 6. Row sums on the default-size measles grid.
Outcome matrix_hygiene() {
  const auto t0 = Clock::now();
  const auto p = testing::measles_like(0.97, 0.2);
  const auto g = build_grid(p, 40, 40);
  const auto t = build_transition(g, p, InterventionSet{{0.0, 0.5}});
  const auto om = build_observation(g, SurveyDesign{{0.0, 0.001}, 8}, {0.95, 0.99});
  const double secs = seconds_since(t0);
  const double err = std::max(t.max_row_sum_error(), om.max_row_sum_error());
  bool nonnegative = true;
  for (const auto& m : t.matrices) nonnegative = nonnegative && m.all_nonnegative();
  return {err <= 1e-9 && nonnegative && secs < 60.0,
          num(g.size()) + " states, max row-sum error " + num(err) + ", build " + num(secs) + " s"};
}

// 7. Calibration recovers the generating parameters.
Outcome calibration_recovery() {
  const auto t0 = Clock::now();
  const auto truth = testing::measles_like(0.97, 0.05);
  int passing = 0;
  double worst_beta = 0.0;
  double worst_alpha = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = calibrate(testing::synthetic(truth, seed));
    double worst = 0.0;
    for (std::size_t k = 0; k < kSeasonLength; ++k) {
      const double lt = std::log(truth.beta_seasonal[k]);
      worst = std::max(worst, std::abs(std::log(r.params.beta_seasonal[k]) - lt) / std::abs(lt));
    }
    const double da = std::abs(r.params.alpha_mix - truth.alpha_mix);
    worst_beta = std::max(worst_beta, worst);
    worst_alpha = std::max(worst_alpha, da);
    if (worst <= 0.05 && da <= 0.05) ++passing;
  }
  const double secs = seconds_since(t0);
  return {passing >= 9 && secs < 10.0, num(passing) + "/10 seeds pass, worst log-beta rel error " + num(worst_beta) +
                                           ", worst alpha error " + num(worst_alpha) + ", " + num(secs) + " s"};
}

// 8. Campaign timing matters on the toy and the best step is grid-stable.
Outcome timing_matters() {
  const auto c = load_config(kToyConfig);
  const auto sweep = [&](std::size_t i_bins) {
    const auto g = build_grid(*c.parameters, c.s_bins, i_bins);
    const auto t = build_transition(g, *c.parameters, c.interventions, c.quadrature);
    return sia_timing_sweep(t, g.incidence(), initial_belief(g, c.initial), c.budget, c.horizon, c.costs.discount);
  };
  const auto shipped = sweep(c.i_bins);
  const auto coarse = sweep(40);
  const auto fine = sweep(80);
  const auto shift = static_cast<long>(fine.best_timing) - static_cast<long>(coarse.best_timing);
  const bool ok = shipped.max_min_ratio() > 1.1 && coarse.max_min_ratio() > 1.1 && fine.max_min_ratio() > 1.1 &&
                  std::abs(shift) <= 1;
  return {ok, "ratio " + num(shipped.max_min_ratio()) + " (" + num(c.i_bins) + " I-bins), " +
                  num(coarse.max_min_ratio()) + " (40), " + num(fine.max_min_ratio()) + " (80); best step " +
                  num(coarse.best_timing) + " -> " + num(fine.best_timing)};
}

// 9. Closed-loop policy against the best open-loop campaign, paired seeds.
Outcome closed_loop_dominance() {
  const auto t0 = Clock::now();
  ScratchDir dir;
  const auto out = dir.path.string();
  for (const char* cmd : {"build", "solve", "simulate"}) {
    if (run_cli({cmd, "--config", kToyConfig, "--out", out, "--reps", "1000", "--quiet"}) != 0) {
      return {false, std::string(cmd) + " failed"};
    }
  }
  const auto summary = read_csv(dir.path / "summary.csv");
  const auto comparison = read_csv(dir.path / "comparison.csv");
  // Row 1 is the closed-loop policy and the paired baseline; later rows are open-loop.
  std::size_t best = 0;
  for (std::size_t r = 2; r < summary.size(); ++r) {
    if (best == 0 || std::stod(summary[r][3]) < std::stod(summary[best][3])) best = r;
  }
  if (best == 0 || summary[1][0].rfind("solved_", 0) != 0) return {false, "unexpected summary layout"};
  const double closed = std::stod(summary[1][3]);
  const double open = std::stod(summary[best][3]);
  const double paired_se = std::stod(comparison[best][4]);
  const std::size_t reps = std::stoul(comparison[best][2]);
  const double secs = seconds_since(t0);
  const bool ok = reps == 1000 && closed <= open + 2.0 * paired_se && secs < 120.0;
  return {ok, "closed-loop " + num(closed) + " vs " + summary[best][0] + " " + num(open) + " (paired SE " +
                  num(paired_se) + ", " + num(reps) + " reps), " + num(secs) + " s"};
}

// 10. Two end-to-end runs of the binary give byte-identical artifacts.
Outcome determinism(const std::string& binary) {
  ScratchDir a, b;
  const std::vector<std::pair<std::string, std::vector<std::string>>> pipelines{
      {kCalibrateConfig, {"calibrate", "build", "solve", "simulate", "sweep", "voi", "report"}},
      {kToyConfig, {"build", "solve", "simulate", "sweep", "voi", "report"}},
  };
  std::size_t compared = 0;
  for (std::size_t p = 0; p < pipelines.size(); ++p) {
    for (const auto* dir : {&a, &b}) {
      const auto out = dir->path / std::to_string(p);
      for (const auto& cmd : pipelines[p].second) {
        const std::string line = "'" + binary + "' " + cmd + " --config '" + pipelines[p].first + "' --out '" +
                                 out.string() + "' --reps 200 --quiet";
        if (std::system(line.c_str()) != 0) return {false, "command failed: " + line};
      }
    }
    for (const auto& entry : fs::directory_iterator(a.path / std::to_string(p))) {
      const auto other = b.path / std::to_string(p) / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        return {false, "artifact differs: " + entry.path().filename().string()};
      }
      ++compared;
    }
  }
  return {compared >= 15, num(compared) + " artifacts byte-identical across two runs of " + fs::path(binary).filename().string()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string binary = argc > 1 ? argv[1] : EPIPLAN_CLI_PATH;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact solve matches expectimax", oracle_equivalence},
      {"value iteration matches policy iteration", mdp_cross_check},
      {"perfect observation reduces to the MDP", perfect_observation},
      {"belief filter identities", filter_identities},
      {"value of information sign", voi_sign},
      {"stochastic rows on the 40x40x24 grid", matrix_hygiene},
      {"calibration recovery", calibration_recovery},
      {"campaign timing matters and is grid-stable", timing_matters},
      {"closed-loop policy vs best open-loop campaign", closed_loop_dominance},
      {"deterministic CLI artifacts", [&] { return determinism(binary); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (k + 1) << ": " << criteria[k].first << " ("
              << o.detail << ")" << std::endl;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
