#include <doctest.h>

#include <cmath>
#include <sstream>

#include "epiplan/calibration.hpp"
#include "epiplan/errors.hpp"
#include "support.hpp"

using namespace epiplan;
using testing::measles_like;
using testing::synthetic;

TEST_SUITE("calibration") {
  TEST_CASE("synthetic recovery") {
    const auto truth = measles_like(0.97, 0.05);
    int passing = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = calibrate(synthetic(truth, seed));
      double worst = 0.0;
      for (std::size_t k = 0; k < kSeasonLength; ++k) {
        const double lt = std::log(truth.beta_seasonal[k]);
        worst = std::max(worst, std::abs(std::log(r.params.beta_seasonal[k]) - lt) / std::abs(lt));
      }
      if (worst <= 0.05 && std::abs(r.params.alpha_mix - 0.97) <= 0.05) ++passing;
      CHECK(r.params.noise_sd == doctest::Approx(0.05).epsilon(0.2));
      CHECK(r.excluded_steps == 0);
    }
    CHECK(passing >= 9);
  }

  TEST_CASE("constant incidence with unit mixing gives beta = 1 / S") {
    CaseSeries s;
    for (long t = 0; t < 60; ++t) s.records.push_back({t, 500.0, 500.0, 1.0e5});
    CalibrationOptions o;
    o.alpha_mix = 1.0;
    o.mean_susceptible_fraction = 0.2;
    const auto r = calibrate(s, o);
    for (double b : r.params.beta_seasonal) CHECK(b == doctest::Approx(1.0 / 20000.0).epsilon(1e-12));
    CHECK(r.params.alpha_mix == 1.0);
    CHECK(r.params.noise_sd <= 1e-12);
    for (double b : r.params.birth_schedule) CHECK(b == 500.0);
    CHECK(r.params.population == 1.0e5);
  }

  TEST_CASE("constant incidence with a free exponent is degenerate") {
    CaseSeries s;
    for (long t = 0; t < 60; ++t) s.records.push_back({t, 500.0, 500.0, 1.0e5});
    CHECK_THROWS_AS(calibrate(s), CalibrationError);
  }

  TEST_CASE("zero-case steps are excluded") {
    auto series = synthetic(measles_like(0.97, 0.05), 3);
    series.records[100].cases = 0.0;
    const auto r = calibrate(series);
    CHECK(r.excluded_steps == 2);
    CHECK(r.used_steps == series.size() - 3);
    CHECK(r.params.alpha_mix == doctest::Approx(0.97).epsilon(0.1));
  }

  TEST_CASE("short series are rejected") {
    const auto series = synthetic(measles_like(0.97, 0.05), 1, 1);
    CHECK(series.size() == 26);
    CHECK_THROWS_AS(calibrate(series), CalibrationError);
  }

  TEST_CASE("susceptible reconstruction follows births minus cases") {
    const auto series = synthetic(measles_like(0.97, 0.05), 2);
    const auto r = calibrate(series);
    for (std::size_t k = 1; k < series.size(); ++k) {
      const double expected = r.susceptible[k - 1] + series.records[k - 1].births - series.records[k].cases;
      CHECK(r.susceptible[k] == doctest::Approx(expected).epsilon(1e-12));
    }
    double mean = 0.0;
    for (double v : r.susceptible) mean += v;
    CHECK(mean / static_cast<double>(series.size()) == doctest::Approx(r.mean_susceptible).epsilon(1e-12));
  }

  TEST_CASE("csv round trip") {
    const auto series = synthetic(measles_like(0.97, 0.05), 4, 3);
    std::stringstream ss;
    write_case_series(ss, series);
    CHECK(read_case_series(ss) == series);
  }

  TEST_CASE("csv without population uses the default") {
    std::istringstream in("t,cases,births\n0,3,4\n1,5,4\n");
    const auto s = read_case_series(in, 1000.0);
    REQUIRE(s.size() == 2);
    CHECK(s.records[1] == CaseRecord{1, 5.0, 4.0, 1000.0});
    std::istringstream again("t,cases,births\n0,3,4\n");
    CHECK_THROWS_AS(read_case_series(again), DataError);
  }

  TEST_CASE("malformed csv") {
    std::istringstream bad_header("time,cases,births\n");
    CHECK_THROWS_AS(read_case_series(bad_header, 10.0), DataError);
    std::istringstream bad_number("t,cases,births\n0,x,4\n");
    CHECK_THROWS_AS(read_case_series(bad_number, 10.0), DataError);
    std::istringstream gap("t,cases,births\n0,1,4\n2,1,4\n");
    CHECK_THROWS_AS(read_case_series(gap, 10.0), DataError);
    std::istringstream negative("t,cases,births\n0,-1,4\n");
    CHECK_THROWS_AS(read_case_series(negative, 10.0), DataError);
    CHECK_THROWS_AS(load_case_series("/nonexistent/cases.csv", 10.0), ConfigError);
  }
}
