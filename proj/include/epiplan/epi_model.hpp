#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "epiplan/matrix.hpp"

namespace epiplan {

/// Seasonal period in biweekly steps (tau = t mod 24).
inline constexpr int kSeasonLength = 24;

/// Stochastic TSIR parameters. beta multiplies raw susceptible counts, so it is
/// expressed per person per biweek.
struct TsirParams {
  std::array<double, kSeasonLength> beta_seasonal{};
  double alpha_mix = 1.0;
  std::array<double, kSeasonLength> birth_schedule{};
  double noise_sd = 0.0;
  double population = 1.0;

  /// Throws ConfigError when any invariant fails.
  void validate() const;
  double max_births() const;

  bool operator==(const TsirParams&) const = default;
};

struct EpiState {
  double S = 0.0;
  double I = 0.0;
  int tau = 0;

  bool valid(double population) const;

  bool operator==(const EpiState&) const = default;
};

/// Vaccination levels a_s = 0..A_s with the susceptible fraction each reaches.
struct InterventionSet {
  std::vector<double> coverage{0.0};

  std::size_t size() const noexcept { return coverage.size(); }
  void validate() const;

  bool operator==(const InterventionSet&) const = default;
};

double seasonal_beta(const TsirParams& params, int tau);

/// One TSIR step. Incidence is computed from the incoming state first, then the
/// susceptible update uses the new incidence. Both are rounded to counts and
/// clamped to feasible ranges.
EpiState tsir_step(const EpiState& state, double mu, const TsirParams& params, double eps);

/// Discretization of (S, I, tau). S bins are linear over [0, N]; I bin 0 is the
/// exact zero {I = 0}, the rest are log-spaced over [1, N].
class StateGrid {
 public:
  StateGrid() = default;
  StateGrid(std::vector<double> s_edges, std::vector<double> i_edges);

  std::size_t s_bins() const noexcept { return s_edges_.size() - 1; }
  std::size_t i_bins() const noexcept { return i_edges_.size() - 1; }
  std::size_t size() const noexcept { return s_bins() * i_bins() * kSeasonLength; }
  /// Cells in one tau slice; cells of a slice are contiguous.
  std::size_t slice_size() const noexcept { return s_bins() * i_bins(); }

  const std::vector<double>& s_edges() const noexcept { return s_edges_; }
  const std::vector<double>& i_edges() const noexcept { return i_edges_; }
  double population() const noexcept { return s_edges_.back(); }

  std::size_t index(std::size_t s_bin, std::size_t i_bin, int tau) const;
  struct Coords {
    std::size_t s_bin;
    std::size_t i_bin;
    int tau;
  };
  Coords coords(std::size_t cell) const;

  std::size_t s_bin_of(double S) const;
  std::size_t i_bin_of(double I) const;
  std::size_t cell_of(const EpiState& x) const;

  /// Arithmetic midpoint in S, geometric midpoint in I (exact 0 for bin 0).
  EpiState representative(std::size_t cell) const;
  double representative_s(std::size_t s_bin) const;
  double representative_i(std::size_t i_bin) const;

  /// Representative incidence per cell.
  std::vector<double> incidence() const;

  bool operator==(const StateGrid&) const = default;

 private:
  std::vector<double> s_edges_{0.0, 1.0};
  std::vector<double> i_edges_{0.0, 1.0};
};

StateGrid build_grid(const TsirParams& params, std::size_t s_bins, std::size_t i_bins);

/// Per-action transition matrices T_a[s, s'] = Pr(s' | s, a).
struct TransitionModel {
  std::vector<double> coverage;  // mu for each action
  std::vector<CsrMatrix> matrices;

  std::size_t actions() const noexcept { return matrices.size(); }
  std::size_t states() const noexcept { return matrices.empty() ? 0 : matrices.front().rows(); }
  double max_row_sum_error() const;

  bool operator==(const TransitionModel&) const = default;
};

/// Equal-weight lognormal noise nodes: exp(sd * Phi^{-1}((j + 0.5) / n)).
std::vector<double> noise_quadrature(double noise_sd, std::size_t n);

inline constexpr std::size_t kDefaultQuadrature = 32;

TransitionModel build_transition(const StateGrid& grid, const TsirParams& params, const InterventionSet& actions,
                                 std::size_t n_quadrature = kDefaultQuadrature);

}  // namespace epiplan
