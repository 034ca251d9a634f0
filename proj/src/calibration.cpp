#include "epiplan/calibration.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "epiplan/errors.hpp"
#include "epiplan/format.hpp"

namespace epiplan {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("case series line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
  }
  return v;
}

int season_of(long t) {
  const long m = t % kSeasonLength;
  return static_cast<int>(m < 0 ? m + kSeasonLength : m);
}

struct Fit {
  bool ok = false;
  double rss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd coef;
  std::size_t rows = 0;
};

}  // namespace

void CaseSeries::validate() const {
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (k > 0 && r.t != records[k - 1].t + 1) throw DataError("case series time indices are not contiguous");
    if (!(r.cases >= 0.0) || !std::isfinite(r.cases)) throw DataError("case counts must be finite and >= 0");
    if (!(r.births >= 0.0) || !std::isfinite(r.births)) throw DataError("birth counts must be finite and >= 0");
    if (!(r.population > 0.0) || !std::isfinite(r.population)) throw DataError("population must be finite and > 0");
  }
}

CaseSeries read_case_series(std::istream& in, double default_population) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("case series is empty");
  const auto header = split(line);
  const bool with_population = header.size() == 4;
  if (header.size() < 3 || header.size() > 4 || header[0] != "t" || header[1] != "cases" || header[2] != "births" ||
      (with_population && header[3] != "population")) {
    throw DataError("case series header must be t,cases,births[,population]");
  }
  if (!with_population && !(default_population > 0.0)) {
    throw DataError("case series has no population column and no default population");
  }
  CaseSeries series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw DataError("case series line " + std::to_string(line_no) + ": wrong field count");
    CaseRecord r;
    r.t = parse_number<long>(f[0], line_no, "t");
    r.cases = parse_number<double>(f[1], line_no, "cases");
    r.births = parse_number<double>(f[2], line_no, "births");
    r.population = with_population ? parse_number<double>(f[3], line_no, "population") : default_population;
    series.records.push_back(r);
  }
  series.validate();
  return series;
}

CaseSeries load_case_series(const std::string& path, double default_population) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open case series '" + path + "'");
  return read_case_series(in, default_population);
}

void write_case_series(std::ostream& out, const CaseSeries& series) {
  out << "t,cases,births,population\n";
  for (const auto& r : series.records) {
    out << r.t << ',' << format_double(r.cases) << ',' << format_double(r.births) << ',' << format_double(r.population) << '\n';
  }
}

CaseSeries simulate_case_series(const TsirParams& params, const EpiState& initial, std::size_t steps,
                                std::uint64_t seed) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CaseSeries series;
  EpiState x = initial;
  for (std::size_t k = 0; k < steps; ++k) {
    const long t = initial.tau + static_cast<long>(k);
    series.records.push_back({t, x.I, params.birth_schedule[static_cast<std::size_t>(x.tau)], params.population});
    x = tsir_step(x, 0.0, params, std::exp(params.noise_sd * normal(rng)));
  }
  return series;
}

std::vector<double> CalibrationOptions::default_fraction_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 2000; ++k) g.push_back(0.0005 * k);
  return g;
}

CalibrationResult calibrate(const CaseSeries& series, const CalibrationOptions& options) {
  series.validate();
  const std::size_t n = series.size();
  if (n < options.min_length) {
    throw CalibrationError("calibration needs at least " + std::to_string(options.min_length) + " steps, got " +
                           std::to_string(n));
  }
  if (options.alpha_mix && !(*options.alpha_mix > 0.0 && *options.alpha_mix <= 1.0)) {
    throw ConfigError("fixed alpha_mix must lie in (0, 1]");
  }
  const auto& rec = series.records;
  double population = 0.0;
  for (const auto& r : rec) population += r.population;
  population /= static_cast<double>(n);

  // Cumulative births minus cumulative cases, centered so the fitted mean is S-bar.
  std::vector<double> z(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) z[k] = z[k - 1] + rec[k - 1].births - rec[k].cases;
  double z_mean = 0.0;
  for (double v : z) z_mean += v;
  z_mean /= static_cast<double>(n);
  for (double& v : z) v -= z_mean;

  std::vector<std::size_t> rows;
  for (std::size_t k = 1; k < n; ++k) {
    if (rec[k].cases > 0.0 && rec[k - 1].cases > 0.0) rows.push_back(k);
  }
  const std::size_t cols = kSeasonLength + (options.alpha_mix ? 0 : 1);
  if (rows.size() <= cols) {
    throw CalibrationError("calibration has " + std::to_string(rows.size()) + " usable steps for " +
                           std::to_string(cols) + " coefficients");
  }

  const auto fit_at = [&](double s_bar) {
    Fit fit;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t k = rows[r];
      const double s_prev = s_bar + z[k - 1];
      if (!(s_prev > 0.0)) return fit;
      const auto i = static_cast<Eigen::Index>(r);
      const double log_prev = std::log(rec[k - 1].cases);
      y(i) = std::log(rec[k].cases) - std::log(s_prev);
      x(i, season_of(rec[k - 1].t)) = 1.0;
      if (options.alpha_mix) {
        y(i) -= *options.alpha_mix * log_prev;
      } else {
        x(i, kSeasonLength) = log_prev;
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) return fit;
    fit.coef = qr.solve(y);
    fit.rss = (y - x * fit.coef).squaredNorm();
    fit.rows = rows.size();
    fit.ok = true;
    return fit;
  };

  std::vector<double> candidates =
      options.mean_susceptible_fraction ? std::vector<double>{*options.mean_susceptible_fraction} : options.fraction_grid;
  if (candidates.empty()) throw ConfigError("calibration fraction grid is empty");
  Fit best;
  double best_s_bar = 0.0;
  bool any_feasible = false;
  for (double f : candidates) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("mean susceptible fraction must lie in (0, 1]");
    const double s_bar = f * population;
    auto fit = fit_at(s_bar);
    if (!fit.ok) continue;
    any_feasible = true;
    if (fit.rss < best.rss) {
      best = std::move(fit);
      best_s_bar = s_bar;
    }
  }
  if (!any_feasible) {
    throw CalibrationError("no candidate mean susceptible level gives positive susceptibles and a full-rank regression");
  }

  CalibrationResult out;
  out.mean_susceptible = best_s_bar;
  out.residual_ss = best.rss;
  out.used_steps = rows.size();
  out.excluded_steps = (n - 1) - rows.size();
  for (double v : z) out.susceptible.push_back(best_s_bar + v);

  TsirParams& p = out.params;
  for (int tau = 0; tau < kSeasonLength; ++tau) p.beta_seasonal[static_cast<std::size_t>(tau)] = std::exp(best.coef(tau));
  p.alpha_mix = options.alpha_mix ? *options.alpha_mix : best.coef(kSeasonLength);
  const double dof = static_cast<double>(rows.size() - cols);
  p.noise_sd = std::sqrt(best.rss / dof);
  p.population = population;
  std::array<double, kSeasonLength> counts{};
  for (const auto& r : rec) {
    const auto tau = static_cast<std::size_t>(season_of(r.t));
    p.birth_schedule[tau] += r.births;
    counts[tau] += 1.0;
  }
  for (std::size_t tau = 0; tau < kSeasonLength; ++tau) {
    if (counts[tau] > 0.0) p.birth_schedule[tau] /= counts[tau];
  }
  return out;
}

}  // namespace epiplan
