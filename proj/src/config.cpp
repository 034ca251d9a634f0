#include "epiplan/config.hpp"

#include <filesystem>
#include <set>

#include "epiplan/errors.hpp"

namespace epiplan {

namespace fs = std::filesystem;

namespace {

void only_keys(const Json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

ValueRange read_range(const Json& j, const std::string& where) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return {v, v};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    const ValueRange r{j[0].get<double>(), j[1].get<double>()};
    if (!(r.lo <= r.hi)) throw ConfigError(where + " range must satisfy lo <= hi");
    return r;
  }
  throw ConfigError(where + " must be a number or a [lo, hi] pair");
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_relative()) p = fs::path(base_dir) / p;
  return p.lexically_normal().string();
}

void must_exist(const std::string& path, const char* what) {
  if (!path.empty() && !fs::exists(path)) throw ConfigError(std::string(what) + " '" + path + "' does not exist");
}

bool in_range(double x, const ValueRange& r) { return x >= r.lo && x <= r.hi; }

}  // namespace

Belief initial_belief(const StateGrid& grid, const InitialSpec& spec) {
  if (spec.tau < 0 || spec.tau >= kSeasonLength) throw ConfigError("initial.tau must lie in [0, 24)");
  const double n = grid.population();
  const auto bins = [&](const ValueRange& r, std::size_t count, auto bin_of, auto rep) {
    std::vector<std::size_t> out;
    if (r.lo == r.hi) {
      if (r.lo < 0.0 || r.lo > n) throw ConfigError("initial value outside [0, N]");
      out.push_back(bin_of(r.lo));
      return out;
    }
    for (std::size_t b = 0; b < count; ++b) {
      if (in_range(rep(b), r)) out.push_back(b);
    }
    return out;
  };
  const auto s_bins = bins(
      spec.susceptible, grid.s_bins(), [&](double x) { return grid.s_bin_of(x); },
      [&](std::size_t b) { return grid.representative_s(b); });
  const auto i_bins = bins(
      spec.infected, grid.i_bins(), [&](double x) { return grid.i_bin_of(x); },
      [&](std::size_t b) { return grid.representative_i(b); });
  if (s_bins.empty() || i_bins.empty()) throw ConfigError("initial ranges select no grid cell");
  std::vector<double> w(grid.size(), 0.0);
  const double mass = 1.0 / static_cast<double>(s_bins.size() * i_bins.size());
  for (auto si : s_bins) {
    for (auto ii : i_bins) w[grid.index(si, ii, spec.tau)] = mass;
  }
  return Belief(std::move(w));
}

std::string to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::mdp: return "mdp";
    case SolveMode::pomdp_exact: return "pomdp-exact";
    case SolveMode::pomdp_reduced: return "pomdp-reduced";
  }
  return "unknown";
}

SolveMode parse_solve_mode(const std::string& text) {
  if (text == "mdp") return SolveMode::mdp;
  if (text == "pomdp-exact") return SolveMode::pomdp_exact;
  if (text == "pomdp-reduced") return SolveMode::pomdp_reduced;
  throw ConfigError("unknown solver mode '" + text + "' (mdp | pomdp-exact | pomdp-reduced)");
}

PruneMode parse_prune_mode(const std::string& text) {
  if (text == "automatic") return PruneMode::automatic;
  if (text == "lp") return PruneMode::lp;
  if (text == "grid") return PruneMode::grid;
  if (text == "none") return PruneMode::none;
  throw ConfigError("unknown prune mode '" + text + "' (automatic | lp | grid | none)");
}

void RunConfig::validate() const {
  if (parameters) parameters->validate();
  if (s_bins < 1 || i_bins < 2) throw ConfigError("grid needs s_bins >= 1 and i_bins >= 2");
  if (quadrature < 1) throw ConfigError("grid.quadrature must be >= 1");
  interventions.validate();
  survey.validate();
  tests.validate();
  costs.validate();
  if (horizon < 1) throw ConfigError("solver.horizon must be >= 1");
  if (reps < 1) throw ConfigError("simulation.reps must be >= 1");
  budget.validate();
  if (parameter_augmentation) parameter_grid.validate();
  if (initial.tau < 0 || initial.tau >= kSeasonLength) throw ConfigError("initial.tau must lie in [0, 24)");
}

RunConfig parse_config(const Json& j, const std::string& base_dir) {
  RunConfig c;
  only_keys(j, "config",
            {"seed", "output_dir", "model", "grid", "interventions", "survey", "costs", "initial", "solver",
             "parameter_grid", "simulation", "sweep"});
  read(j, "seed", c.seed, "config");
  read(j, "output_dir", c.output_dir, "config");

  if (j.contains("model")) {
    const auto& m = j["model"];
    only_keys(m, "model", {"parameters", "parameters_file", "case_series", "default_population", "calibration"});
    if (m.contains("parameters")) c.parameters = params_from_json(m["parameters"]);
    read(m, "parameters_file", c.parameters_file, "model");
    read(m, "case_series", c.case_series, "model");
    read(m, "default_population", c.default_population, "model");
    if (m.contains("calibration")) {
      const auto& cal = m["calibration"];
      only_keys(cal, "model.calibration", {"alpha_mix", "mean_susceptible_fraction"});
      if (cal.contains("alpha_mix") && !cal["alpha_mix"].is_null()) {
        c.calibration.alpha_mix = 0.0;
        read(cal, "alpha_mix", *c.calibration.alpha_mix, "model.calibration");
      }
      if (cal.contains("mean_susceptible_fraction") && !cal["mean_susceptible_fraction"].is_null()) {
        c.calibration.mean_susceptible_fraction = 0.0;
        read(cal, "mean_susceptible_fraction", *c.calibration.mean_susceptible_fraction, "model.calibration");
      }
    }
    const int sources = (c.parameters ? 1 : 0) + (c.parameters_file.empty() ? 0 : 1);
    if (sources > 1) throw ConfigError("model: give either parameters or parameters_file, not both");
  }
  c.parameters_file = resolve(c.parameters_file, base_dir);
  c.case_series = resolve(c.case_series, base_dir);
  must_exist(c.parameters_file, "parameters file");
  must_exist(c.case_series, "case series");

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    only_keys(g, "grid", {"s_bins", "i_bins", "quadrature"});
    read(g, "s_bins", c.s_bins, "grid");
    read(g, "i_bins", c.i_bins, "grid");
    read(g, "quadrature", c.quadrature, "grid");
  }
  read(j, "interventions", c.interventions.coverage, "config");
  if (j.contains("survey")) {
    const auto& s = j["survey"];
    only_keys(s, "survey", {"coverage", "obs_bins", "bin_edges", "sensitivity", "specificity"});
    read(s, "coverage", c.survey.coverage, "survey");
    read(s, "obs_bins", c.survey.obs_bins, "survey");
    read(s, "bin_edges", c.survey.bin_edges, "survey");
    if (!c.survey.bin_edges.empty() && !s.contains("obs_bins")) c.survey.obs_bins = c.survey.bin_edges.size() - 1;
    read(s, "sensitivity", c.tests.sensitivity, "survey");
    read(s, "specificity", c.tests.specificity, "survey");
  }
  if (j.contains("costs")) {
    const auto& k = j["costs"];
    only_keys(k, "costs", {"case", "vaccination", "test", "discount"});
    read(k, "case", c.costs.case_cost, "costs");
    read(k, "vaccination", c.costs.vaccination_cost, "costs");
    read(k, "test", c.costs.test_cost, "costs");
    read(k, "discount", c.costs.discount, "costs");
  }
  if (j.contains("initial")) {
    const auto& i = j["initial"];
    only_keys(i, "initial", {"S", "I", "tau"});
    if (!i.contains("S") || !i.contains("I")) throw ConfigError("initial needs S and I");
    c.initial.susceptible = read_range(i["S"], "initial.S");
    c.initial.infected = read_range(i["I"], "initial.I");
    read(i, "tau", c.initial.tau, "initial");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    only_keys(s, "solver",
              {"mode", "horizon", "surveillance", "parameter_augmentation", "prune", "witness_trajectories"});
    std::string mode = to_string(c.mode);
    read(s, "mode", mode, "solver");
    c.mode = parse_solve_mode(mode);
    read(s, "horizon", c.horizon, "solver");
    read(s, "surveillance", c.surveillance, "solver");
    read(s, "parameter_augmentation", c.parameter_augmentation, "solver");
    std::string prune = "automatic";
    read(s, "prune", prune, "solver");
    c.prune = parse_prune_mode(prune);
    read(s, "witness_trajectories", c.witness_trajectories, "solver");
  }
  if (j.contains("parameter_grid")) {
    const auto& dims = j["parameter_grid"];
    if (!dims.is_array()) throw ConfigError("parameter_grid must be an array of dimensions");
    for (const auto& d : dims) {
      only_keys(d, "parameter_grid[]", {"name", "support", "variance"});
      ParamGrid::Dimension dim;
      read(d, "name", dim.name, "parameter_grid[]");
      read(d, "support", dim.support, "parameter_grid[]");
      read(d, "variance", dim.variance, "parameter_grid[]");
      c.parameter_grid.dims.push_back(std::move(dim));
    }
  }
  if (j.contains("simulation")) {
    only_keys(j["simulation"], "simulation", {"reps"});
    read(j["simulation"], "reps", c.reps, "simulation");
  }
  if (j.contains("sweep")) {
    only_keys(j["sweep"], "sweep", {"budget", "coverage"});
    read(j["sweep"], "budget", c.budget.total, "sweep");
    read(j["sweep"], "coverage", c.budget.coverage, "sweep");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  const Json j = read_json_file(path, "config");
  const auto dir = fs::path(path).parent_path();
  return parse_config(j, dir.empty() ? std::string(".") : dir.string());
}

}  // namespace epiplan
