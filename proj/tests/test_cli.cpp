#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "epiplan/cli.hpp"
#include "support.hpp"

using namespace epiplan;
namespace fs = std::filesystem;

namespace {

// Fresh directory per call; removed by the owner.
struct TempDir {
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("epiplan_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name = "") const { return (path / name).string(); }
  fs::path path;
};

Json small_config() {
  const auto p = testing::toy_params(2000.0);
  Json j;
  j["seed"] = 5;
  j["model"]["parameters"] = to_json(p);
  j["grid"] = {{"s_bins", 3}, {"i_bins", 8}, {"quadrature", 8}};
  j["interventions"] = {0.0, 0.5};
  j["survey"] = {{"coverage", {0.0, 0.05}}, {"bin_edges", {0.0, 0.05, 0.2, 1.0}}, {"sensitivity", 0.9}, {"specificity", 0.98}};
  j["costs"] = {{"case", 1.0}, {"vaccination", 10.0}, {"test", 0.01}, {"discount", 0.95}};
  j["initial"] = {{"S", {1000, 2000}}, {"I", {1, 10}}, {"tau", 0}};
  j["solver"] = {{"mode", "pomdp-exact"}, {"horizon", 4}, {"witness_trajectories", 40}};
  j["simulation"] = {{"reps", 60}};
  j["sweep"] = {{"budget", 1.0}, {"coverage", 0.5}};
  return j;
}

std::string write_config(const TempDir& dir, const Json& j) {
  const auto p = dir.str("config.json");
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::string> kArtifacts{"model.json",     "policy.json", "rollouts.csv", "summary.csv",
                                          "comparison.csv", "sweep.csv",   "voi.txt",      "report.txt"};

void run_pipeline(const std::string& config, const std::string& out, const std::vector<std::string>& extra = {}) {
  for (const char* cmd : {"build", "solve", "simulate", "sweep", "voi", "report"}) {
    std::vector<std::string> args{cmd, "--config", config, "--out", out, "--quiet"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = invoke(args);
    INFO(cmd << ": " << r.err);
    REQUIRE(r.code == 0);
  }
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("parameter file round trip") {
    const auto p = testing::toy_params();
    CHECK(params_from_json(Json::parse(dump_json(to_json(p)))) == p);
  }

  TEST_CASE("model file round trip") {
    const auto m = build_model_file(testing::toy_params(), 3, 4, 8, InterventionSet{{0.0, 0.5}},
                                    SurveyDesign{{0.0, 0.02}, 4, {}}, {0.9, 0.95});
    CHECK(model_from_json(Json::parse(dump_json(to_json(m)))) == m);
    auto edged = m;
    edged.survey = SurveyDesign{{0.0, 0.02}, 3, {0.0, 0.1, 0.5, 1.0}};
    edged.observations = build_observation(edged.grid, edged.survey, edged.tests);
    CHECK(model_from_json(Json::parse(dump_json(to_json(edged)))) == edged);
  }

  TEST_CASE("policy file round trip") {
    testing::Rng rng(3);
    const auto model = testing::random_pomdp(3, 2, 2, rng);
    SolveSettings s;
    s.horizon = 3;
    s.discount = 0.9;
    PolicyFile pf;
    pf.mode = "pomdp-exact";
    pf.horizon = 3;
    pf.discount = 0.9;
    pf.states = 3;
    pf.action_labels = {"a", "b"};
    pf.stages = solve_pomdp(model, s);
    pf.initial_value = pf.stages.front().value(Belief::uniform(3));
    pf.mdp = mdp_value_iteration(model.transitions, model.cost, s);
    CHECK(policy_from_json(Json::parse(dump_json(to_json(pf)))) == pf);
  }

  TEST_CASE("artifact loaders reject foreign files") {
    CHECK_THROWS_AS(model_from_json(Json{{"format", "epiplan-policy"}, {"version", 1}}), ConfigError);
    CHECK_THROWS_AS(policy_from_json(Json{{"format", "epiplan-policy"}, {"version", 99}}), ConfigError);
    CHECK_THROWS_AS(policy_from_json(Json{{"format", "epiplan-policy"}, {"version", 1}}), ConfigError);
    CHECK_THROWS_AS(params_from_json(Json{{"alpha_mix", 0.9}}), ConfigError);
  }

  TEST_CASE("config schema") {
    TempDir dir;
    auto j = small_config();
    const auto c = parse_config(j, dir.str());
    CHECK(c.s_bins == 3);
    CHECK(c.survey.obs_bins == 3);
    CHECK(c.initial.infected == ValueRange{1.0, 10.0});
    CHECK(c.mode == SolveMode::pomdp_exact);

    auto unknown = j;
    unknown["solver"]["speed"] = "fast";
    CHECK_THROWS_AS(parse_config(unknown, dir.str()), ConfigError);
    auto wrong_type = j;
    wrong_type["grid"]["s_bins"] = "three";
    CHECK_THROWS_AS(parse_config(wrong_type, dir.str()), ConfigError);
    auto missing = j;
    missing["model"] = {{"case_series", "nowhere.csv"}};
    CHECK_THROWS_AS(parse_config(missing, dir.str()), ConfigError);
    auto both = j;
    both["model"]["parameters_file"] = "config.json";
    write_config(dir, j);
    CHECK_THROWS_AS(parse_config(both, dir.str()), ConfigError);
    auto bad_mode = j;
    bad_mode["solver"]["mode"] = "fast";
    CHECK_THROWS_AS(parse_config(bad_mode, dir.str()), ConfigError);
    auto bad_edges = j;
    bad_edges["survey"]["bin_edges"] = {0.0, 0.5, 0.4, 1.0};
    CHECK_THROWS_AS(parse_config(bad_edges, dir.str()), ConfigError);
  }

  TEST_CASE("initial belief selects grid cells") {
    const auto g = build_grid(testing::toy_params(), 4, 5);
    const auto point = initial_belief(g, {{500.0, 500.0}, {30.0, 30.0}, 2});
    CHECK(point == Belief::point_mass(g.size(), g.cell_of({500.0, 30.0, 2})));
    const auto spread = initial_belief(g, {{0.0, 1000.0}, {1.0, 1000.0}, 0});
    for (std::size_t c = 0; c < g.size(); ++c) {
      const auto co = g.coords(c);
      CHECK((spread[c] > 0.0) == (co.tau == 0 && co.i_bin > 0));
    }
    CHECK_THROWS_AS(initial_belief(g, {{0.0, 1.0}, {0.1, 0.2}, 0}), ConfigError);
  }

  TEST_CASE("missing input file exits with the config category") {
    const auto r = invoke({"build", "--config", "/nonexistent/config.json"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.rfind("error[config]:", 0) == 0);
  }

  TEST_CASE("usage errors exit with the config category") {
    CHECK(invoke({}).code == cli::kExitConfig);
    CHECK(invoke({"fly"}).code == cli::kExitConfig);
    CHECK(invoke({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("solve before build is a config error") {
    TempDir dir;
    const auto r = invoke({"solve", "--config", write_config(dir, small_config()), "--out", dir.str("out")});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("run build first") != std::string::npos);
  }

  TEST_CASE("calibration on a short series is a data error") {
    TempDir dir;
    std::ofstream(dir.str("cases.csv")) << "t,cases,births,population\n0,5,10,1000\n1,6,10,1000\n";
    auto j = small_config();
    j["model"] = {{"case_series", "cases.csv"}};
    const auto r = invoke({"calibrate", "--config", write_config(dir, j), "--out", dir.str("out")});
    CHECK(r.code == cli::kExitData);
    CHECK(r.err.rfind("error[data]:", 0) == 0);
  }

  TEST_CASE("calibrate then build uses the calibrated parameters") {
    TempDir dir;
    {
      std::ofstream f(dir.str("cases.csv"));
      write_case_series(f, testing::synthetic(testing::measles_like(0.97, 0.05), 4));
    }
    auto j = small_config();
    j["model"] = {{"case_series", "cases.csv"}, {"calibration", {{"alpha_mix", 0.97}}}};
    const auto config = write_config(dir, j);
    const auto out = dir.str("out");
    REQUIRE(invoke({"calibrate", "--config", config, "--out", out}).code == 0);
    const auto params = params_from_json(read_json_file(out + "/params.json", "params").at("parameters"));
    CHECK(params.alpha_mix == 0.97);
    CHECK(params.population == 1.0e6);
    REQUIRE(invoke({"build", "--config", config, "--out", out}).code == 0);
    CHECK(model_from_json(read_json_file(out + "/model.json", "model")).params == params);
  }

  TEST_CASE("pipeline writes every artifact and they reload") {
    TempDir dir;
    const auto config = write_config(dir, small_config());
    run_pipeline(config, dir.str("out"));
    for (const auto& a : kArtifacts) CHECK(fs::exists(dir.path / "out" / a));
    const auto model = model_from_json(read_json_file(dir.str("out/model.json"), "model"));
    CHECK(to_json(model) == read_json_file(dir.str("out/model.json"), "model"));
    const auto policy = policy_from_json(read_json_file(dir.str("out/policy.json"), "policy"));
    CHECK(policy.states == 2 * model.grid.size());
    CHECK(policy.stages.size() == 4);
    const auto summary = slurp(dir.str("out/summary.csv"));
    CHECK(summary.rfind("policy,completed,failed,cost_mean", 0) == 0);
    CHECK(summary.find("campaign_t04") != std::string::npos);
  }

  TEST_CASE("same config and seed give byte-identical artifacts") {
    TempDir a, b;
    const auto j = small_config();
    run_pipeline(write_config(a, j), a.str("out"));
    run_pipeline(write_config(b, j), b.str("out"));
    for (const auto& name : kArtifacts) {
      INFO(name);
      CHECK(slurp(a.str("out/" + name)) == slurp(b.str("out/" + name)));
    }
  }

  TEST_CASE("a different seed changes the rollouts") {
    TempDir dir;
    const auto config = write_config(dir, small_config());
    run_pipeline(config, dir.str("one"));
    run_pipeline(config, dir.str("two"), {"--seed", "6"});
    CHECK(slurp(dir.str("one/rollouts.csv")) != slurp(dir.str("two/rollouts.csv")));
    CHECK(slurp(dir.str("one/model.json")) == slurp(dir.str("two/model.json")));
  }

  TEST_CASE("solver modes and flags") {
    TempDir dir;
    const auto config = write_config(dir, small_config());
    const auto out = dir.str("out");
    REQUIRE(invoke({"build", "--config", config, "--out", out}).code == 0);
    for (const char* mode : {"mdp", "pomdp-exact", "pomdp-reduced"}) {
      REQUIRE(invoke({"solve", "--config", config, "--out", out, "--mode", mode}).code == 0);
      const auto pf = policy_from_json(read_json_file(out + "/policy.json", "policy"));
      CHECK(pf.mode == mode);
      REQUIRE(invoke({"simulate", "--config", config, "--out", out, "--reps", "20"}).code == 0);
    }
    REQUIRE(invoke({"solve", "--config", config, "--out", out, "--no-surveillance", "--horizon", "2"}).code == 0);
    auto pf = policy_from_json(read_json_file(out + "/policy.json", "policy"));
    CHECK_FALSE(pf.surveillance);
    CHECK(pf.horizon == 2);
    CHECK(pf.action_labels.size() == 2);

    auto j = small_config();
    j["parameter_grid"] = Json::array({{{"name", "beta_scale"}, {"support", {0.8, 1.2}}, {"variance", 0.0}}});
    const auto with_params = write_config(dir, j);
    REQUIRE(invoke({"solve", "--config", with_params, "--out", out, "--param-augment"}).code == 0);
    pf = policy_from_json(read_json_file(out + "/policy.json", "policy"));
    CHECK(pf.parameter_augmentation);
    CHECK(pf.states == 2 * 2 * 3 * 8 * kSeasonLength);
    REQUIRE(invoke({"simulate", "--config", with_params, "--out", out, "--reps", "20"}).code == 0);
  }

  TEST_CASE("planned value agrees with closed-loop rollouts") {
    TempDir dir;
    auto j = small_config();
    j["simulation"]["reps"] = 2000;
    run_pipeline(write_config(dir, j), dir.str("out"));
    const auto pf = policy_from_json(read_json_file(dir.str("out/policy.json"), "policy"));
    std::ifstream in(dir.str("out/summary.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::vector<std::string> f;
    std::stringstream ss(row);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    const double mean = std::stod(f[3]);
    const double se = std::stod(f[4]);
    MESSAGE("planned " << pf.initial_value << " simulated " << mean << " +- " << se);
    CHECK(std::abs(mean - pf.initial_value) <= 3.0 * se + 1e-9);
  }

  TEST_CASE("shipped toy summary matches the golden file") {
    TempDir dir;
    const std::string config = EPIPLAN_SOURCE_DIR "/configs/toy.json";
    for (const char* cmd : {"build", "solve", "simulate"}) {
      REQUIRE(invoke({cmd, "--config", config, "--out", dir.str("out"), "--quiet"}).code == 0);
    }
    std::ifstream got(dir.str("out/summary.csv"));
    std::ifstream want(EPIPLAN_SOURCE_DIR "/tests/golden/toy_summary.csv");
    REQUIRE(want.good());
    std::string g, w;
    while (std::getline(want, w)) {
      REQUIRE(std::getline(got, g));
      std::vector<std::string> gf, wf;
      std::stringstream gs(g), ws(w);
      for (std::string x; std::getline(gs, x, ',');) gf.push_back(x);
      for (std::string x; std::getline(ws, x, ',');) wf.push_back(x);
      REQUIRE(gf.size() == wf.size());
      CHECK(gf[0] == wf[0]);
      for (std::size_t k = 1; k < wf.size() && w.rfind("policy", 0) != 0; ++k) {
        CHECK(std::stod(gf[k]) == doctest::Approx(std::stod(wf[k])).epsilon(1e-9));
      }
    }
    CHECK_FALSE(std::getline(got, g));
  }
}
