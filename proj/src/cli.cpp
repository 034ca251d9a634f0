#include "epiplan/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "epiplan/format.hpp"

namespace epiplan::cli {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> reps;
  bool quiet = false;
  bool surveillance = false;
  bool no_surveillance = false;
  bool parameter_augmentation = false;
};

struct Context {
  RunConfig config;
  fs::path out_dir;
  bool quiet = false;
  std::ostream* out = nullptr;

  std::string path(const char* name) const { return (out_dir / name).string(); }
  void wrote(const std::string& p) const {
    if (!quiet) *out << "wrote " << p << "\n";
  }
};

Context make_context(const Overrides& o, std::ostream& out) {
  if (o.config.empty()) throw ConfigError("--config is required");
  Context ctx;
  ctx.config = load_config(o.config);
  auto& c = ctx.config;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.mode) c.mode = parse_solve_mode(*o.mode);
  if (o.horizon) c.horizon = *o.horizon;
  if (o.reps) c.reps = *o.reps;
  if (o.surveillance && o.no_surveillance) throw ConfigError("--surveillance and --no-surveillance conflict");
  if (o.surveillance) c.surveillance = true;
  if (o.no_surveillance) c.surveillance = false;
  if (o.parameter_augmentation) c.parameter_augmentation = true;
  c.validate();
  ctx.out_dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + c.output_dir + "': " + ec.message());
  ctx.quiet = o.quiet;
  ctx.out = &out;
  return ctx;
}

TsirParams resolve_parameters(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.parameters) return *c.parameters;
  std::string file = c.parameters_file;
  if (file.empty()) {
    file = ctx.path("params.json");
    if (!fs::exists(file)) {
      throw ConfigError("no model parameters: set model.parameters or model.parameters_file, or run calibrate first");
    }
  }
  const Json j = read_json_file(file, "parameters file");
  return params_from_json(j.contains("parameters") ? j.at("parameters") : j);
}

ModelFile load_model(const Context& ctx) {
  const auto p = ctx.path("model.json");
  if (!fs::exists(p)) throw ConfigError("model file '" + p + "' does not exist (run build first)");
  return model_from_json(read_json_file(p, "model file"));
}

PolicyFile load_policy(const Context& ctx) {
  const auto p = ctx.path("policy.json");
  if (!fs::exists(p)) throw ConfigError("policy file '" + p + "' does not exist (run solve first)");
  return policy_from_json(read_json_file(p, "policy file"));
}

std::size_t campaign_level(const InterventionSet& set, const BudgetSpec& budget) {
  for (std::size_t a = 0; a < set.size(); ++a) {
    if (set.coverage[a] == budget.coverage) return a;
  }
  throw ConfigError("no intervention level has the campaign coverage " + format_double(budget.coverage));
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string two_digits(std::size_t t) {
  std::ostringstream s;
  s << std::setw(2) << std::setfill('0') << t;
  return s.str();
}

// --- subcommands ---------------------------------------------------------

void cmd_calibrate(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.case_series.empty()) throw ConfigError("calibrate needs model.case_series");
  const auto series = load_case_series(c.case_series, c.default_population);
  const auto r = calibrate(series, c.calibration);
  try {
    r.params.validate();
  } catch (const ConfigError& e) {
    throw CalibrationError(std::string("calibrated parameters are invalid (") + e.what() +
                           "); fix model.calibration.alpha_mix");
  }
  Json j;
  j["format"] = "epiplan-params";
  j["version"] = kFormatVersion;
  j["parameters"] = to_json(r.params);
  j["diagnostics"] = {{"mean_susceptible", r.mean_susceptible},
                      {"residual_ss", r.residual_ss},
                      {"used_steps", r.used_steps},
                      {"excluded_steps", r.excluded_steps}};
  const auto p = ctx.path("params.json");
  write_text_file(p, dump_json(j));
  ctx.wrote(p);
}

void cmd_build(const Context& ctx) {
  const auto& c = ctx.config;
  const auto m =
      build_model_file(resolve_parameters(ctx), c.s_bins, c.i_bins, c.quadrature, c.interventions, c.survey, c.tests);
  const auto p = ctx.path("model.json");
  write_text_file(p, dump_json(to_json(m)));
  ctx.wrote(p);
}

void cmd_solve(const Context& ctx) {
  const auto& c = ctx.config;
  const auto model = load_model(ctx);
  const auto prob = assemble_problem(model, c, c.surveillance, c.parameter_augmentation);
  const auto settings = solve_settings(c);
  PolicyFile pf;
  pf.mode = to_string(c.mode);
  pf.horizon = c.horizon;
  pf.discount = c.costs.discount;
  pf.surveillance = c.surveillance;
  pf.parameter_augmentation = c.parameter_augmentation;
  pf.states = prob.space.model.states();
  pf.action_labels = prob.space.model.action_labels;
  if (c.mode == SolveMode::mdp) {
    pf.mdp = mdp_value_iteration(prob.space.model.transitions, prob.space.model.cost, settings);
    pf.initial_value = dot(prob.initial.weights(), pf.mdp.stages.front().values);
  } else {
    const auto witnesses =
        sample_reachable_beliefs(prob.space.model, prob.initial, c.horizon, c.witness_trajectories, c.seed);
    pf.stages = solve_pomdp(prob.space.model, settings, &witnesses);
    pf.initial_value = pf.stages.front().value(prob.initial);
  }
  const auto p = ctx.path("policy.json");
  write_text_file(p, dump_json(to_json(pf)));
  ctx.wrote(p);
}

void cmd_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  const auto model = load_model(ctx);
  const auto pf = load_policy(ctx);
  const auto prob = assemble_problem(model, c, pf.surveillance, pf.parameter_augmentation);
  if (pf.states != prob.space.model.states() || pf.action_labels != prob.space.model.action_labels) {
    throw ConfigError("policy file does not match the model and configuration");
  }
  const std::size_t k = pf.horizon;
  const std::size_t idle = prob.space.action_index({0, 0});
  const std::size_t campaign = prob.space.action_index({campaign_level(model.interventions, c.budget), 0});

  std::vector<Policy> policies;
  if (pf.mode == to_string(SolveMode::mdp)) {
    policies.push_back(Policy::state_feedback("solved_" + pf.mode, pf.mdp));
  } else {
    policies.push_back(Policy::closed_loop("solved_" + pf.mode, pf.stages));
  }
  policies.push_back(Policy::open_loop("no_campaign", std::vector<std::size_t>(k, idle)));
  for (std::size_t t = 1; t <= k; ++t) {
    // Joint action 0 is (no vaccination, no survey), matching the idle steps.
    policies.push_back(Policy::open_loop("campaign_t" + two_digits(t), campaign_schedule(k, t, campaign)));
  }

  RolloutSetup setup;
  setup.truth = &prob.space.model;
  setup.initial = prob.initial;
  setup.horizon = k;
  setup.discount = pf.discount;
  setup.seed = c.seed;
  setup.reps = c.reps;
  const auto cmp = compare_policies(policies, setup);

  std::ostringstream rollouts;
  rollouts << "policy,rep,seed,discounted_cost,discounted_infections,terminal_cost,failed\n";
  for (std::size_t i = 0; i < policies.size(); ++i) {
    for (const auto& r : cmp.results[i].records) {
      rollouts << policies[i].name << ',' << r.rep << ',' << r.seed << ',' << format_double(r.discounted_cost) << ','
               << format_double(r.discounted_infections) << ',' << format_double(r.terminal_cost) << ','
               << (r.failed ? 1 : 0) << '\n';
    }
  }
  std::ostringstream summary;
  summary << "policy,completed,failed,cost_mean,cost_se,infections_mean,infections_se\n";
  std::ostringstream comparison;
  comparison << "policy,baseline,paired,cost_diff_mean,cost_diff_se,infections_diff_mean,infections_diff_se\n";
  for (const auto& row : cmp.rows) {
    const auto& s = row.summary;
    summary << row.name << ',' << s.completed << ',' << s.failed << ',' << format_double(s.cost.mean) << ','
            << format_double(s.cost.standard_error) << ',' << format_double(s.infections.mean) << ','
            << format_double(s.infections.standard_error) << '\n';
    comparison << row.name << ',' << cmp.rows.front().name << ',' << row.paired << ','
               << format_double(row.cost_difference.mean) << ',' << format_double(row.cost_difference.standard_error)
               << ',' << format_double(row.infection_difference.mean) << ','
               << format_double(row.infection_difference.standard_error) << '\n';
  }
  for (const auto& [name, text] : {std::pair<const char*, std::string>{"rollouts.csv", rollouts.str()},
                                   {"summary.csv", summary.str()},
                                   {"comparison.csv", comparison.str()}}) {
    const auto p = ctx.path(name);
    write_text_file(p, text);
    ctx.wrote(p);
  }
}

void cmd_sweep(const Context& ctx) {
  const auto& c = ctx.config;
  const auto model = load_model(ctx);
  const auto b0 = initial_belief(model.grid, c.initial);
  const auto r =
      sia_timing_sweep(model.transitions, model.grid.incidence(), b0, c.budget, c.horizon, c.costs.discount);
  std::ostringstream s;
  s << "timing,objective,best\n";
  for (std::size_t t = 1; t <= r.objective.size(); ++t) {
    s << t << ',' << format_double(r.objective[t - 1]) << ',' << (t == r.best_timing ? 1 : 0) << '\n';
  }
  const auto p = ctx.path("sweep.csv");
  write_text_file(p, s.str());
  ctx.wrote(p);
}

void cmd_voi(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.mode == SolveMode::mdp) throw ConfigError("voi needs a POMDP mode (pomdp-exact | pomdp-reduced)");
  const auto model = load_model(ctx);
  const auto prob = assemble_problem(model, c, true, c.parameter_augmentation);
  const auto witnesses =
      sample_reachable_beliefs(prob.space.model, prob.initial, c.horizon, c.witness_trajectories, c.seed);
  const auto r = value_of_information(prob.inputs, c.costs, solve_settings(c), prob.base_initial, &witnesses);
  std::ostringstream s;
  s << "mode " << to_string(c.mode) << "\n"
    << "horizon " << c.horizon << "\n"
    << "value_full " << format_double(r.value_full) << "\n"
    << "value_restricted " << format_double(r.value_restricted) << "\n"
    << "value_of_information " << format_double(r.value_of_information) << "\n";
  const auto p = ctx.path("voi.txt");
  write_text_file(p, s.str());
  ctx.wrote(p);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

void cmd_report(const Context& ctx) {
  std::ostringstream s;
  s << "epiplan report\n";
  if (fs::exists(ctx.path("model.json"))) {
    const auto m = load_model(ctx);
    s << "\nmodel\n"
      << "  grid " << m.grid.s_bins() << " S bins x " << m.grid.i_bins() << " I bins x " << kSeasonLength
      << " seasons = " << m.grid.size() << " cells\n"
      << "  population " << format_double(m.params.population) << ", alpha_mix " << format_double(m.params.alpha_mix)
      << ", noise_sd " << format_double(m.params.noise_sd) << "\n"
      << "  interventions " << m.interventions.size() << ", survey levels " << m.survey.levels() << ", observations "
      << m.survey.observation_count() << "\n";
  }
  if (fs::exists(ctx.path("policy.json"))) {
    const auto pf = load_policy(ctx);
    s << "\npolicy\n"
      << "  mode " << pf.mode << ", horizon " << pf.horizon << ", discount " << format_double(pf.discount) << "\n"
      << "  states " << pf.states << ", actions " << pf.action_labels.size() << ", surveillance "
      << (pf.surveillance ? "on" : "off") << ", parameter augmentation " << (pf.parameter_augmentation ? "on" : "off")
      << "\n"
      << "  planned expected cost at the initial belief " << fixed(pf.initial_value) << "\n";
  }
  if (fs::exists(ctx.path("summary.csv")) && fs::exists(ctx.path("comparison.csv"))) {
    const auto summary = read_csv(ctx.path("summary.csv"));
    const auto comparison = read_csv(ctx.path("comparison.csv"));
    s << "\nrollouts (mean discounted cost +- standard error)\n";
    std::size_t best_open = 0;
    double best_cost = 0.0;
    for (std::size_t r = 1; r < summary.size(); ++r) {
      const auto& row = summary[r];
      s << "  " << std::left << std::setw(24) << row[0] << std::right << std::setw(12) << fixed(std::stod(row[3]))
        << " +- " << fixed(std::stod(row[4])) << "\n";
      if (r >= 2) {
        const double cost = std::stod(row[3]);
        if (best_open == 0 || cost < best_cost) {
          best_open = r;
          best_cost = cost;
        }
      }
    }
    if (best_open > 0 && best_open < comparison.size()) {
      const auto& row = comparison[best_open];
      s << "  best open-loop schedule " << row[0] << ": paired difference to " << row[1] << " "
        << fixed(std::stod(row[3])) << " +- " << fixed(std::stod(row[4])) << "\n";
    }
  }
  if (fs::exists(ctx.path("sweep.csv"))) {
    const auto rows = read_csv(ctx.path("sweep.csv"));
    double lo = 0.0, hi = 0.0;
    std::string best;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const double v = std::stod(rows[r][1]);
      if (r == 1 || v < lo) lo = v;
      if (r == 1 || v > hi) hi = v;
      if (rows[r][2] == "1") best = rows[r][0];
    }
    s << "\ncampaign timing sweep\n"
      << "  best timing step " << best << ", discounted burden " << fixed(lo) << "\n"
      << "  worst / best burden ratio " << fixed(lo > 0.0 ? hi / lo : 0.0, 3) << "\n";
  }
  if (fs::exists(ctx.path("voi.txt"))) {
    std::ifstream in(ctx.path("voi.txt"));
    s << "\nvalue of information\n";
    std::string line;
    while (std::getline(in, line)) s << "  " << line << "\n";
  }
  const auto p = ctx.path("report.txt");
  write_text_file(p, s.str());
  ctx.wrote(p);
}

}  // namespace

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return kExitConfig;
    case ErrorCategory::data: return kExitData;
    case ErrorCategory::solver:
    case ErrorCategory::contract: return kExitSolver;
  }
  return kExitSolver;
}

Problem assemble_problem(const ModelFile& model, const RunConfig& config, bool surveillance,
                         bool parameter_augmentation) {
  Problem prob;
  prob.inputs = tsir_augmentation_inputs(model.grid, model.transitions, model.observations, model.survey);
  auto base = initial_belief(model.grid, config.initial);
  if (parameter_augmentation) {
    const auto aug = augment_with_params(model.params, model.grid, model.interventions, model.quadrature,
                                         config.parameter_grid);
    prob.param_points = aug.param_points;
    prob.inputs.base_transitions = aug.transitions.matrices;
    for (auto& o : prob.inputs.survey_observations) o = lift_observation(o, aug.param_points);
    prob.inputs.incidence = lift_values(prob.inputs.incidence, aug.param_points);
    // Uniform prior over the parameter points.
    std::vector<double> w;
    for (std::size_t p = 0; p < aug.param_points; ++p) {
      for (double x : base.weights()) w.push_back(x / static_cast<double>(aug.param_points));
    }
    base = Belief(std::move(w));
  }
  prob.space = build_augmented(prob.inputs, config.costs);
  if (!surveillance) prob.space = restrict_to_no_survey(prob.space);
  prob.base_initial = base;
  prob.initial = prob.space.lift(base);
  return prob;
}

SolveSettings solve_settings(const RunConfig& config) {
  SolveSettings s;
  s.horizon = config.horizon;
  s.discount = config.costs.discount;
  s.backup = config.mode == SolveMode::pomdp_reduced ? BackupMode::reduced : BackupMode::exact;
  s.prune = config.prune;
  s.validate();
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Seasonal epidemic vaccination and surveillance planning", "epiplan"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "Run configuration (JSON)");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--mode", o.mode, "Solver mode: mdp | pomdp-exact | pomdp-reduced");
  app.add_option("--horizon", o.horizon, "Planning horizon in biweeks");
  app.add_option("--reps", o.reps, "Rollout repetitions");
  app.add_flag("--quiet", o.quiet, "Do not list written files");
  app.add_flag("--surveillance", o.surveillance, "Plan survey actions jointly with vaccination");
  app.add_flag("--no-surveillance", o.no_surveillance, "Plan vaccination only");
  app.add_flag("--param-augment", o.parameter_augmentation, "Track parameter uncertainty in the state");

  using Command = void (*)(const Context&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands{
      {"calibrate", "Case series -> params.json", cmd_calibrate},
      {"build", "Parameters -> model.json", cmd_build},
      {"solve", "model.json -> policy.json", cmd_solve},
      {"simulate", "policy.json + model.json -> rollouts.csv, summary.csv, comparison.csv", cmd_simulate},
      {"sweep", "model.json + budget -> sweep.csv", cmd_sweep},
      {"voi", "model.json -> voi.txt", cmd_voi},
      {"report", "Artifacts -> report.txt", cmd_report},
  };
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
  }

  std::vector<std::string> argv{"epiplan"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargs;
  for (const auto& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error[config]: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto ctx = make_context(o, out);
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) fn(ctx);
    }
  } catch (const Error& e) {
    err << "error[" << to_string(e.category()) << "]: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error[solver]: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace epiplan::cli
