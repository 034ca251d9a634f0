#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "epiplan/dp_solver.hpp"
#include "epiplan/epi_model.hpp"
#include "epiplan/format.hpp"
#include "epiplan/obs_model.hpp"

namespace epiplan {

using Json = nlohmann::json;

/// Bumped whenever an artifact layout changes incompatibly.
inline constexpr int kFormatVersion = 1;

/// Discretized TSIR model with its survey channels: the `build` artifact.
struct ModelFile {
  TsirParams params;
  StateGrid grid;
  InterventionSet interventions;
  SurveyDesign survey;
  TestCharacteristics tests;
  std::size_t quadrature = kDefaultQuadrature;
  TransitionModel transitions;
  ObservationModel observations;

  bool operator==(const ModelFile&) const = default;
};

ModelFile build_model_file(const TsirParams& params, std::size_t s_bins, std::size_t i_bins, std::size_t quadrature,
                           const InterventionSet& interventions, const SurveyDesign& survey,
                           const TestCharacteristics& tests);

/// Solved policy: the `solve` artifact. POMDP modes fill `stages`, mdp mode
/// fills `mdp`.
struct PolicyFile {
  std::string mode;
  std::size_t horizon = 0;
  double discount = 1.0;
  bool surveillance = false;
  bool parameter_augmentation = false;
  std::size_t states = 0;
  std::vector<std::string> action_labels;
  double initial_value = 0.0;
  std::vector<GammaSet> stages;
  MdpSolution mdp;

  bool operator==(const PolicyFile&) const = default;
};

Json to_json(const TsirParams& p);
TsirParams params_from_json(const Json& j);

Json to_json(const CsrMatrix& m);
CsrMatrix csr_from_json(const Json& j);
Json to_json(const DenseMatrix& m);
DenseMatrix dense_from_json(const Json& j);

Json to_json(const ModelFile& m);
ModelFile model_from_json(const Json& j);

Json to_json(const PolicyFile& p);
PolicyFile policy_from_json(const Json& j);

/// Parse failures and schema violations become ConfigError naming `what`.
Json read_json_file(const std::string& path, const std::string& what);
void write_text_file(const std::string& path, const std::string& text);
std::string dump_json(const Json& j);

}  // namespace epiplan
