#pragma once

// Random instance generators and small reference computations shared by the
// unit and acceptance tests.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epiplan/belief.hpp"
#include "epiplan/calibration.hpp"
#include "epiplan/epi_model.hpp"
#include "epiplan/matrix.hpp"
#include "epiplan/pomdp.hpp"

namespace epiplan::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = e(rng));
  for (auto& x : w) x /= total;
  return w;
}

inline Belief random_belief(std::size_t n, Rng& rng) { return Belief(random_simplex(n, rng)); }

/// Row-stochastic CSR matrix; each row keeps roughly `density` of its entries
/// (at least one).
inline CsrMatrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng, double density = 1.0) {
  std::vector<std::vector<CsrMatrix::Entry>> r(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> w(cols, 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (uniform(rng) < density) total += (w[j] = uniform(rng, 0.05, 1.0));
    }
    if (total == 0.0) total = w[std::uniform_int_distribution<std::size_t>(0, cols - 1)(rng)] = 1.0;
    for (std::size_t j = 0; j < cols; ++j) {
      if (w[j] > 0.0) r[i].push_back({static_cast<CsrMatrix::Index>(j), w[j] / total});
    }
  }
  return CsrMatrix::from_rows(cols, std::move(r));
}

inline DenseMatrix random_stochastic_dense(std::size_t rows, std::size_t cols, Rng& rng) {
  return random_stochastic(rows, cols, rng).to_dense();
}

/// Small POMDP with one observation channel per action and costs in [0, 1].
inline PomdpModel random_pomdp(std::size_t states, std::size_t actions, std::size_t observations, Rng& rng) {
  PomdpModel m;
  m.cost = DenseMatrix(states, actions);
  for (std::size_t a = 0; a < actions; ++a) {
    m.transitions.push_back(random_stochastic(states, states, rng));
    m.observation_channels.push_back(random_stochastic_dense(states, observations, rng));
    m.channel_of_action.push_back(a);
    m.action_labels.push_back("a" + std::to_string(a));
    for (std::size_t s = 0; s < states; ++s) m.cost(s, a) = uniform(rng);
  }
  return m;
}

/// Classic two-door instance in cost form: listen (0), open left (1), open
/// right (2). Tiger behind door 0 or 1; listening reports the right side with
/// probability 0.85.
inline PomdpModel tiger() {
  PomdpModel m;
  m.action_labels = {"listen", "open-left", "open-right"};
  const auto stay = CsrMatrix::identity(2);
  const auto reset = CsrMatrix::from_rows(2, {{{0, 0.5}, {1, 0.5}}, {{0, 0.5}, {1, 0.5}}});
  m.transitions = {stay, reset, reset};
  DenseMatrix hear(2, 2);
  hear(0, 0) = 0.85;
  hear(0, 1) = 0.15;
  hear(1, 0) = 0.15;
  hear(1, 1) = 0.85;
  DenseMatrix none(2, 2);
  none(0, 0) = none(0, 1) = none(1, 0) = none(1, 1) = 0.5;
  m.observation_channels = {hear, none};
  m.channel_of_action = {0, 1, 1};
  m.cost = DenseMatrix(2, 3);
  m.cost(0, 0) = m.cost(1, 0) = 1.0;
  m.cost(0, 1) = 100.0;   // opening the tiger's door
  m.cost(1, 1) = -10.0;
  m.cost(0, 2) = -10.0;
  m.cost(1, 2) = 100.0;
  return m;
}

/// Seasonal toy parameters used across tests: strong seasonal forcing, steady
/// births, moderate noise.
inline TsirParams toy_params(double population = 1000.0) {
  TsirParams p;
  p.population = population;
  p.alpha_mix = 0.97;
  p.noise_sd = 0.2;
  for (int t = 0; t < kSeasonLength; ++t) {
    p.beta_seasonal[t] = 1.2 / population * (1.0 + 0.4 * std::cos(2.0 * 3.141592653589793 * t / kSeasonLength));
    p.birth_schedule[t] = 0.03 * population;
  }
  return p;
}

/// Endemic measles-like city: 1e6 people, ~3% annual births, S near 3.5% of
/// N, mild seasonal forcing.
inline TsirParams measles_like(double alpha, double noise) {
  TsirParams p;
  p.population = 1.0e6;
  p.alpha_mix = alpha;
  p.noise_sd = noise;
  const double s_bar = 0.035 * p.population;
  const double births = 0.03 * p.population / 26.0;
  for (int tau = 0; tau < kSeasonLength; ++tau) {
    const auto k = static_cast<std::size_t>(tau);
    p.beta_seasonal[k] = std::pow(births, 1.0 - alpha) / s_bar * (1.0 + 0.1 * std::cos(2.0 * M_PI * tau / kSeasonLength));
    p.birth_schedule[k] = births;
  }
  return p;
}

inline CaseSeries synthetic(const TsirParams& p, std::uint64_t seed, std::size_t years = 10) {
  // Burn in, then keep `years` of data starting at a season boundary.
  const std::size_t burn = 20 * 26;
  const auto full = simulate_case_series(p, {0.035 * p.population, 1000.0, 0}, burn + years * 26 + kSeasonLength, seed);
  CaseSeries s;
  const std::size_t start = ((burn + kSeasonLength - 1) / kSeasonLength) * kSeasonLength;
  for (std::size_t k = start; k < start + years * 26; ++k) s.records.push_back(full.records[k]);
  return s;
}

}  // namespace epiplan::testing
