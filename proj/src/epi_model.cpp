#include "epiplan/epi_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "epiplan/errors.hpp"
#include "epiplan/kernels.hpp"

namespace epiplan {

void TsirParams::validate() const {
  for (double b : beta_seasonal) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("beta_seasonal entries must be finite and > 0");
  }
  if (!(alpha_mix > 0.0 && alpha_mix <= 1.0)) throw ConfigError("alpha_mix must lie in (0, 1]");
  for (double b : birth_schedule) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("birth_schedule entries must be finite and >= 0");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ConfigError("noise_sd must be finite and >= 0");
  if (!(population > 0.0) || !std::isfinite(population)) throw ConfigError("population must be finite and > 0");
}

double TsirParams::max_births() const { return *std::max_element(birth_schedule.begin(), birth_schedule.end()); }

bool EpiState::valid(double population) const {
  return S >= 0.0 && I >= 0.0 && S + I <= population && tau >= 0 && tau < kSeasonLength;
}

void InterventionSet::validate() const {
  if (coverage.empty()) throw ConfigError("intervention set is empty");
  if (coverage.front() != 0.0) throw ConfigError("intervention level 0 must have zero coverage");
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    if (!(coverage[i] >= 0.0 && coverage[i] <= 1.0)) throw ConfigError("intervention coverage must lie in [0, 1]");
    if (i > 0 && coverage[i] < coverage[i - 1]) throw ConfigError("intervention coverage must be nondecreasing");
  }
}

double seasonal_beta(const TsirParams& params, int tau) {
  if (tau < 0 || tau >= kSeasonLength) throw ContractError("seasonal_beta: tau out of range: " + std::to_string(tau));
  return params.beta_seasonal[static_cast<std::size_t>(tau)];
}

EpiState tsir_step(const EpiState& state, double mu, const TsirParams& params, double eps) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("tsir_step: vaccination fraction outside [0, 1]");
  if (!std::isfinite(eps) || !(eps > 0.0)) throw ConfigError("tsir_step: noise draw must be finite and > 0");
  if (state.tau < 0 || state.tau >= kSeasonLength || state.S < 0.0 || state.I < 0.0) {
    throw ContractError("tsir_step: invalid state");
  }
  const double births = params.birth_schedule[static_cast<std::size_t>(state.tau)];
  const double beta = seasonal_beta(params, state.tau);
  const double pressure = state.I > 0.0 ? std::pow(state.I, params.alpha_mix) : 0.0;
  const double incidence = std::clamp(std::round(beta * pressure * state.S * eps), 0.0, state.S + births);
  const double susceptible =
      std::clamp(std::round((1.0 - mu) * (births + state.S - incidence)), 0.0, params.population);
  return {susceptible, incidence, (state.tau + 1) % kSeasonLength};
}

StateGrid::StateGrid(std::vector<double> s_edges, std::vector<double> i_edges)
    : s_edges_(std::move(s_edges)), i_edges_(std::move(i_edges)) {
  auto check = [](const std::vector<double>& e, const char* name) {
    if (e.size() < 2) throw ConfigError(std::string(name) + " edges need at least two entries");
    if (e.front() != 0.0) throw ConfigError(std::string(name) + " edges must start at 0");
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (!(e[k] > e[k - 1])) throw ConfigError(std::string(name) + " edges must be strictly increasing");
    }
  };
  check(s_edges_, "S");
  check(i_edges_, "I");
  if (s_edges_.back() != i_edges_.back()) throw ConfigError("S and I edges must both end at the population");
}

std::size_t StateGrid::index(std::size_t s_bin, std::size_t i_bin, int tau) const {
  if (s_bin >= s_bins() || i_bin >= i_bins() || tau < 0 || tau >= kSeasonLength) {
    throw ContractError("StateGrid::index: coordinates out of range");
  }
  return (static_cast<std::size_t>(tau) * i_bins() + i_bin) * s_bins() + s_bin;
}

StateGrid::Coords StateGrid::coords(std::size_t cell) const {
  if (cell >= size()) throw ContractError("StateGrid::coords: cell out of range");
  const std::size_t s = cell % s_bins();
  const std::size_t rest = cell / s_bins();
  return {s, rest % i_bins(), static_cast<int>(rest / i_bins())};
}

namespace {

// Bin k covers [edges[k], edges[k+1]); values beyond the last edge go to the last bin.
std::size_t bin_of(const std::vector<double>& edges, double x) {
  if (x <= edges.front()) return 0;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto k = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(k, edges.size() - 2);
}

}  // namespace

std::size_t StateGrid::s_bin_of(double S) const { return bin_of(s_edges_, S); }
std::size_t StateGrid::i_bin_of(double I) const { return bin_of(i_edges_, I); }

std::size_t StateGrid::cell_of(const EpiState& x) const { return index(s_bin_of(x.S), i_bin_of(x.I), x.tau); }

double StateGrid::representative_s(std::size_t s_bin) const {
  return 0.5 * (s_edges_[s_bin] + s_edges_[s_bin + 1]);
}

double StateGrid::representative_i(std::size_t i_bin) const {
  if (i_bin == 0) return 0.0;
  return std::sqrt(i_edges_[i_bin] * i_edges_[i_bin + 1]);
}

EpiState StateGrid::representative(std::size_t cell) const {
  const auto c = coords(cell);
  return {representative_s(c.s_bin), representative_i(c.i_bin), c.tau};
}

std::vector<double> StateGrid::incidence() const {
  std::vector<double> out(size());
  for (std::size_t cell = 0; cell < out.size(); ++cell) out[cell] = representative_i(coords(cell).i_bin);
  return out;
}

StateGrid build_grid(const TsirParams& params, std::size_t s_bins, std::size_t i_bins) {
  if (s_bins < 2 || i_bins < 2) throw ConfigError("build_grid: need at least 2 S bins and 2 I bins");
  params.validate();
  const double n = params.population;
  if (!(n > 1.0)) throw ConfigError("build_grid: population must exceed 1");
  std::vector<double> s_edges(s_bins + 1);
  for (std::size_t k = 0; k <= s_bins; ++k) s_edges[k] = n * static_cast<double>(k) / static_cast<double>(s_bins);
  s_edges.back() = n;

  std::vector<double> i_edges(i_bins + 1);
  i_edges[0] = 0.0;
  const double log_n = std::log(n);
  for (std::size_t k = 1; k <= i_bins; ++k) {
    i_edges[k] = std::exp(log_n * static_cast<double>(k - 1) / static_cast<double>(i_bins - 1));
  }
  i_edges[1] = 1.0;
  i_edges.back() = n;
  return StateGrid(std::move(s_edges), std::move(i_edges));
}

double TransitionModel::max_row_sum_error() const {
  double worst = 0.0;
  for (const auto& m : matrices) worst = std::max(worst, m.max_row_sum_error());
  return worst;
}

std::vector<double> noise_quadrature(double noise_sd, std::size_t n) {
  if (n < 1) throw ConfigError("noise quadrature needs at least one node");
  std::vector<double> nodes(n, 1.0);
  if (noise_sd == 0.0) return nodes;
  const boost::math::normal_distribution<double> standard(0.0, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    nodes[j] = std::exp(noise_sd * boost::math::quantile(standard, u));
  }
  return nodes;
}

TransitionModel build_transition(const StateGrid& grid, const TsirParams& params, const InterventionSet& actions,
                                 std::size_t n_quadrature) {
  params.validate();
  actions.validate();
  if (grid.population() != params.population) throw ConfigError("build_transition: grid/population mismatch");
  const auto nodes = noise_quadrature(params.noise_sd, n_quadrature);
  TransitionModel model;
  model.coverage = actions.coverage;
  model.matrices.reserve(actions.size());
  for (double mu : actions.coverage) model.matrices.push_back(kernels::transition_matrix(grid, params, mu, nodes));
  return model;
}

}  // namespace epiplan
