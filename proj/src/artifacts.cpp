#include "epiplan/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "epiplan/errors.hpp"

namespace epiplan {

namespace {

void expect_format(const Json& j, const char* format) {
  if (!j.is_object() || j.value("format", std::string()) != format) {
    throw ConfigError(std::string("not a ") + format + " file");
  }
  const int version = j.value("version", 0);
  if (version != kFormatVersion) {
    throw ConfigError(std::string(format) + " version " + std::to_string(version) + " is not supported");
  }
}

template <typename T>
std::array<double, kSeasonLength> seasonal_array(const Json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<T>>();
  if (v.size() != kSeasonLength) {
    throw ConfigError(std::string(key) + " needs " + std::to_string(kSeasonLength) + " entries");
  }
  std::array<double, kSeasonLength> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

// nlohmann reports missing keys and type mismatches with its own exception
// types; callers only ever see ConfigError.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

ModelFile build_model_file(const TsirParams& params, std::size_t s_bins, std::size_t i_bins, std::size_t quadrature,
                           const InterventionSet& interventions, const SurveyDesign& survey,
                           const TestCharacteristics& tests) {
  ModelFile m;
  m.params = params;
  m.grid = build_grid(params, s_bins, i_bins);
  m.interventions = interventions;
  m.survey = survey;
  m.tests = tests;
  m.quadrature = quadrature;
  m.transitions = build_transition(m.grid, params, interventions, quadrature);
  m.observations = build_observation(m.grid, survey, tests);
  return m;
}

Json to_json(const TsirParams& p) {
  Json j;
  j["beta_seasonal"] = p.beta_seasonal;
  j["alpha_mix"] = p.alpha_mix;
  j["birth_schedule"] = p.birth_schedule;
  j["noise_sd"] = p.noise_sd;
  j["population"] = p.population;
  return j;
}

TsirParams params_from_json(const Json& j) {
  return guarded("parameters", [&] {
    TsirParams p;
    p.beta_seasonal = seasonal_array<double>(j, "beta_seasonal");
    p.alpha_mix = j.at("alpha_mix").get<double>();
    p.birth_schedule = seasonal_array<double>(j, "birth_schedule");
    p.noise_sd = j.at("noise_sd").get<double>();
    p.population = j.at("population").get<double>();
    p.validate();
    return p;
  });
}

Json to_json(const CsrMatrix& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"row_ptr", m.row_ptr()}, {"col_idx", m.col_idx()},
              {"values", m.values()}};
}

CsrMatrix csr_from_json(const Json& j) {
  return guarded("sparse matrix", [&] {
    return CsrMatrix::from_arrays(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                                  j.at("row_ptr").get<std::vector<std::size_t>>(),
                                  j.at("col_idx").get<std::vector<CsrMatrix::Index>>(),
                                  j.at("values").get<std::vector<double>>());
  });
}

Json to_json(const DenseMatrix& m) { return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

DenseMatrix dense_from_json(const Json& j) {
  return guarded("dense matrix", [&] {
    DenseMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols()) throw ConfigError("dense matrix: data size does not match its shape");
    m.data() = std::move(data);
    return m;
  });
}

Json to_json(const ModelFile& m) {
  Json j;
  j["format"] = "epiplan-model";
  j["version"] = kFormatVersion;
  j["parameters"] = to_json(m.params);
  j["grid"] = {{"s_edges", m.grid.s_edges()}, {"i_edges", m.grid.i_edges()}, {"season_length", kSeasonLength},
               {"states", m.grid.size()}};
  j["interventions"] = m.interventions.coverage;
  j["survey"] = {{"coverage", m.survey.coverage}, {"obs_bins", m.survey.obs_bins}, {"bin_edges", m.survey.bin_edges}};
  j["tests"] = {{"sensitivity", m.tests.sensitivity}, {"specificity", m.tests.specificity}};
  j["quadrature"] = m.quadrature;
  Json t = Json::array();
  for (std::size_t a = 0; a < m.transitions.actions(); ++a) {
    t.push_back({{"coverage", m.transitions.coverage[a]}, {"matrix", to_json(m.transitions.matrices[a])}});
  }
  j["transitions"] = std::move(t);
  Json o = Json::array();
  for (const auto& level : m.observations.levels) o.push_back(to_json(level));
  j["observations"] = std::move(o);
  return j;
}

ModelFile model_from_json(const Json& j) {
  expect_format(j, "epiplan-model");
  return guarded("model file", [&] {
    ModelFile m;
    m.params = params_from_json(j.at("parameters"));
    const auto& g = j.at("grid");
    m.grid = StateGrid(g.at("s_edges").get<std::vector<double>>(), g.at("i_edges").get<std::vector<double>>());
    m.interventions.coverage = j.at("interventions").get<std::vector<double>>();
    m.interventions.validate();
    m.survey.coverage = j.at("survey").at("coverage").get<std::vector<double>>();
    m.survey.obs_bins = j.at("survey").at("obs_bins").get<std::size_t>();
    m.survey.bin_edges = j.at("survey").at("bin_edges").get<std::vector<double>>();
    m.survey.validate();
    m.tests.sensitivity = j.at("tests").at("sensitivity").get<double>();
    m.tests.specificity = j.at("tests").at("specificity").get<double>();
    m.quadrature = j.at("quadrature").get<std::size_t>();
    for (const auto& t : j.at("transitions")) {
      m.transitions.coverage.push_back(t.at("coverage").get<double>());
      m.transitions.matrices.push_back(csr_from_json(t.at("matrix")));
    }
    for (const auto& o : j.at("observations")) m.observations.levels.push_back(dense_from_json(o));

    const std::size_t n = m.grid.size();
    if (m.transitions.actions() != m.interventions.size()) throw ConfigError("model file: one transition per intervention");
    for (const auto& t : m.transitions.matrices) {
      if (t.rows() != n || t.cols() != n) throw ConfigError("model file: transition shape does not match the grid");
    }
    if (m.observations.levels.size() != m.survey.levels()) throw ConfigError("model file: one channel per survey level");
    for (const auto& o : m.observations.levels) {
      if (o.rows() != n || o.cols() != m.survey.observation_count()) {
        throw ConfigError("model file: observation shape does not match the grid and survey");
      }
    }
    return m;
  });
}

Json to_json(const PolicyFile& p) {
  Json j;
  j["format"] = "epiplan-policy";
  j["version"] = kFormatVersion;
  j["mode"] = p.mode;
  j["horizon"] = p.horizon;
  j["discount"] = p.discount;
  j["surveillance"] = p.surveillance;
  j["parameter_augmentation"] = p.parameter_augmentation;
  j["states"] = p.states;
  j["action_labels"] = p.action_labels;
  j["initial_value"] = p.initial_value;
  Json stages = Json::array();
  for (const auto& set : p.stages) {
    Json vectors = Json::array();
    for (const auto& g : set.vectors) vectors.push_back({{"action", g.action}, {"values", g.values}});
    stages.push_back({{"stage", set.stage}, {"vectors", std::move(vectors)}});
  }
  j["stages"] = std::move(stages);
  Json mdp_stages = Json::array();
  for (const auto& st : p.mdp.stages) mdp_stages.push_back({{"values", st.values}, {"actions", st.actions}});
  j["mdp"] = {{"stationary", p.mdp.stationary},
              {"iterations", p.mdp.iterations},
              {"residual", p.mdp.residual},
              {"stages", std::move(mdp_stages)}};
  return j;
}

PolicyFile policy_from_json(const Json& j) {
  expect_format(j, "epiplan-policy");
  return guarded("policy file", [&] {
    PolicyFile p;
    p.mode = j.at("mode").get<std::string>();
    p.horizon = j.at("horizon").get<std::size_t>();
    p.discount = j.at("discount").get<double>();
    p.surveillance = j.at("surveillance").get<bool>();
    p.parameter_augmentation = j.at("parameter_augmentation").get<bool>();
    p.states = j.at("states").get<std::size_t>();
    p.action_labels = j.at("action_labels").get<std::vector<std::string>>();
    p.initial_value = j.at("initial_value").get<double>();
    for (const auto& s : j.at("stages")) {
      GammaSet set;
      set.stage = s.at("stage").get<std::size_t>();
      for (const auto& v : s.at("vectors")) {
        GammaVector g;
        g.action = v.at("action").get<std::size_t>();
        g.values = v.at("values").get<std::vector<double>>();
        if (g.values.size() != p.states) throw ConfigError("policy file: vector dimension does not match states");
        if (g.action >= p.action_labels.size()) throw ConfigError("policy file: vector action out of range");
        set.vectors.push_back(std::move(g));
      }
      p.stages.push_back(std::move(set));
    }
    const auto& m = j.at("mdp");
    p.mdp.stationary = m.at("stationary").get<bool>();
    p.mdp.iterations = m.at("iterations").get<std::size_t>();
    p.mdp.residual = m.at("residual").get<double>();
    for (const auto& s : m.at("stages")) {
      p.mdp.stages.push_back({s.at("values").get<std::vector<double>>(), s.at("actions").get<std::vector<std::size_t>>()});
    }
    return p;
  });
}

Json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(what + " '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string dump_json(const Json& j) { return j.dump(1) + "\n"; }

}  // namespace epiplan
