#include "epiplan/obs_model.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "epiplan/errors.hpp"
#include "epiplan/kernels.hpp"

namespace epiplan {

void TestCharacteristics::validate(bool allow_uninformative) const {
  if (!(sensitivity >= 0.0 && sensitivity <= 1.0) || !(specificity >= 0.0 && specificity <= 1.0)) {
    throw ConfigError("test sensitivity and specificity must lie in [0, 1]");
  }
  const double total = sensitivity + specificity;
  if (allow_uninformative ? total < 1.0 : !(total > 1.0)) {
    throw ConfigError("test characteristics must satisfy sensitivity + specificity > 1");
  }
}

std::size_t SurveyDesign::sample_size(std::size_t level, double population) const {
  if (level >= coverage.size()) throw ContractError("survey level out of range");
  return static_cast<std::size_t>(std::llround(coverage[level] * population));
}

std::vector<double> SurveyDesign::edges() const {
  if (!bin_edges.empty()) return bin_edges;
  std::vector<double> e(obs_bins + 1);
  for (std::size_t k = 0; k <= obs_bins; ++k) e[k] = static_cast<double>(k) / static_cast<double>(obs_bins);
  e.back() = 1.0;
  return e;
}

std::size_t SurveyDesign::observation_of_fraction(double fraction) const {
  const auto e = edges();
  const auto it = std::upper_bound(e.begin(), e.end(), fraction);
  const auto bin = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
  return 1 + std::min(bin, obs_bins - 1);
}

void SurveyDesign::validate() const {
  if (coverage.empty() || coverage.front() != 0.0) throw ConfigError("survey level 0 must have zero coverage");
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    if (!(coverage[i] >= 0.0 && coverage[i] <= 1.0)) throw ConfigError("survey coverage must lie in [0, 1]");
    if (i > 0 && coverage[i] < coverage[i - 1]) throw ConfigError("survey coverage must be nondecreasing");
  }
  if (obs_bins < 2) throw ConfigError("survey needs at least 2 observation bins");
  if (!bin_edges.empty()) {
    if (bin_edges.size() != obs_bins + 1) throw ConfigError("survey bin edges need obs_bins + 1 entries");
    if (bin_edges.front() != 0.0 || bin_edges.back() != 1.0) throw ConfigError("survey bin edges must run from 0 to 1");
    for (std::size_t k = 1; k < bin_edges.size(); ++k) {
      if (!(bin_edges[k] > bin_edges[k - 1])) throw ConfigError("survey bin edges must be strictly increasing");
    }
  }
}

double ObservationModel::max_row_sum_error() const {
  double worst = 0.0;
  for (const auto& m : levels) worst = std::max(worst, m.max_row_sum_error());
  return worst;
}

double positive_rate(const EpiState& state, const TestCharacteristics& q, double population) {
  const double infected = std::clamp(state.I, 0.0, population);
  const double p = (q.sensitivity * infected + (1.0 - q.specificity) * (population - infected)) / population;
  return std::clamp(p, 0.0, 1.0);
}

std::vector<double> obs_pmf(const EpiState& state, std::size_t level, const SurveyDesign& design,
                            const TestCharacteristics& q, double population) {
  const std::size_t n = design.sample_size(level, population);
  if (level == 0 || n == 0) return {1.0};
  const double p = positive_rate(state, q, population);
  std::vector<double> pmf(n + 1, 0.0);
  if (p <= 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  for (std::size_t k = 0; k <= n; ++k) pmf[k] = boost::math::pdf(dist, static_cast<double>(k));
  return pmf;
}

namespace {

// Smallest count k with k / n >= edge.
std::size_t first_count_at_or_above(double edge, std::size_t n) {
  auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(edge * static_cast<double>(n))));
  while (k > 0 && static_cast<double>(k - 1) / static_cast<double>(n) >= edge) --k;
  while (k <= n && static_cast<double>(k) / static_cast<double>(n) < edge) ++k;
  return k;
}

// Bins a Binomial(n, p) over the fraction edges using cdf differences.
void binned_binomial(std::size_t n, double p, const std::vector<double>& edges, std::span<double> out) {
  const std::size_t bins = edges.size() - 1;
  std::fill(out.begin(), out.end(), 0.0);
  if (p <= 0.0 || p >= 1.0) {
    const double fraction = p <= 0.0 ? 0.0 : 1.0;
    const auto bin = std::min(static_cast<std::size_t>(std::floor(fraction * static_cast<double>(bins))), bins - 1);
    out[1 + bin] = 1.0;
    return;
  }
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  double below = 0.0;  // Pr(X < lo of the current bin)
  for (std::size_t b = 0; b < bins; ++b) {
    // Last bin is closed at 1, so it takes every count up to n.
    const std::size_t hi_first = b + 1 == bins ? n + 1 : first_count_at_or_above(edges[b + 1], n);
    const double upto = hi_first == 0 ? 0.0 : (hi_first > n ? 1.0 : boost::math::cdf(dist, static_cast<double>(hi_first - 1)));
    out[1 + b] = std::max(0.0, upto - below);
    below = std::max(below, upto);
  }
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
}

}  // namespace

ObservationModel build_observation(const StateGrid& grid, const SurveyDesign& design, const TestCharacteristics& q,
                                   bool allow_uninformative) {
  design.validate();
  q.validate(allow_uninformative);
  const double population = grid.population();
  const auto edges = design.edges();
  const std::size_t cols = design.observation_count();
  const std::size_t slice = grid.slice_size();

  ObservationModel model;
  model.levels.reserve(design.levels());
  for (std::size_t level = 0; level < design.levels(); ++level) {
    const std::size_t n = design.sample_size(level, population);
    if (level == 0 || n == 0) {
      model.levels.emplace_back(grid.size(), cols, 0.0);
      for (std::size_t s = 0; s < grid.size(); ++s) model.levels.back()(s, SurveyDesign::kNullObservation) = 1.0;
      continue;
    }
    // Rows only depend on the I bin, so compute one row per I bin and replicate.
    DenseMatrix per_bin = kernels::dense_rows(grid.i_bins(), cols, [&](std::size_t i_bin, std::span<double> out) {
      const EpiState x{0.0, grid.representative_i(i_bin), 0};
      binned_binomial(n, positive_rate(x, q, population), edges, out);
    });
    DenseMatrix full(grid.size(), cols);
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const std::size_t i_bin = (s % slice) / grid.s_bins();
      std::copy(per_bin.row(i_bin).begin(), per_bin.row(i_bin).end(), full.row(s).begin());
    }
    model.levels.push_back(std::move(full));
  }
  return model;
}

}  // namespace epiplan
