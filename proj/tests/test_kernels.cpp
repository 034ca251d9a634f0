#include <doctest.h>

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "epiplan/kernels.hpp"
#include "support.hpp"

using namespace epiplan;
using epiplan::testing::random_belief;
using epiplan::testing::random_stochastic;
using epiplan::testing::random_stochastic_dense;
using epiplan::testing::Rng;

namespace {

// Force several workers even on a single core so the parallel paths really
// interleave.
struct ThreadScope {
  ThreadScope() {
#ifdef _OPENMP
    previous = omp_get_max_threads();
    omp_set_num_threads(4);
#endif
  }
  ~ThreadScope() {
#ifdef _OPENMP
    omp_set_num_threads(previous);
#endif
  }
  int previous = 1;
};

std::vector<std::vector<double>> random_vectors(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<std::vector<double>> out(count, std::vector<double>(dim));
  for (auto& v : out) {
    for (auto& x : v) x = testing::uniform(rng, -5.0, 5.0);
  }
  return out;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("transition matrix: serial and parallel are bitwise equal") {
    ThreadScope threads;
    const auto p = testing::toy_params();
    const auto g = build_grid(p, 9, 11);
    const auto nodes = noise_quadrature(p.noise_sd, 16);
    for (double mu : {0.0, 0.4}) {
      CHECK(kernels::serial::transition_matrix(g, p, mu, nodes) == kernels::parallel::transition_matrix(g, p, mu, nodes));
    }
  }

  TEST_CASE("dense rows: serial and parallel are bitwise equal") {
    ThreadScope threads;
    const kernels::RowFiller fill = [](std::size_t r, std::span<double> out) {
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::sin(static_cast<double>(r * 31 + j));
    };
    CHECK(kernels::serial::dense_rows(200, 7, fill) == kernels::parallel::dense_rows(200, 7, fill));
  }

  TEST_CASE("projection matches a dense oracle and the parallel version") {
    ThreadScope threads;
    Rng rng(1);
    const auto t = random_stochastic(6, 6, rng, 0.5);
    const auto o = random_stochastic_dense(6, 3, rng);
    const auto next = random_vectors(4, 6, rng);
    const std::vector<std::size_t> obs{0, 2};
    const auto serial = kernels::serial::project(t, o, obs, next);
    const auto parallel = kernels::parallel::project(t, o, obs, next);
    CHECK(serial == parallel);
    const auto dense = t.to_dense();
    REQUIRE(serial.size() == obs.size() * next.size());
    for (std::size_t oi = 0; oi < obs.size(); ++oi) {
      for (std::size_t j = 0; j < next.size(); ++j) {
        for (std::size_t s = 0; s < 6; ++s) {
          double expected = 0.0;
          for (std::size_t k = 0; k < 6; ++k) expected += dense(s, k) * o(k, obs[oi]) * next[j][k];
          CHECK(std::abs(serial[oi * next.size() + j][s] - expected) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("witness argmin matches a direct scan") {
    ThreadScope threads;
    Rng rng(2);
    const std::size_t n_obs = 3;
    const std::size_t n_next = 5;
    const auto proj = random_vectors(n_obs * n_next, 4, rng);
    std::vector<kernels::SparseVector> witnesses;
    std::vector<Belief> dense;
    for (int k = 0; k < 30; ++k) {
      dense.push_back(random_belief(4, rng));
      witnesses.push_back(kernels::SparseVector::from_dense(dense.back().weights()));
    }
    witnesses.push_back(kernels::SparseVector::from_dense(Belief::point_mass(4, 2).weights()));
    dense.push_back(Belief::point_mass(4, 2));
    const auto serial = kernels::serial::witness_argmin(proj, n_obs, n_next, witnesses);
    CHECK(serial == kernels::parallel::witness_argmin(proj, n_obs, n_next, witnesses));
    for (std::size_t w = 0; w < dense.size(); ++w) {
      for (std::size_t o = 0; o < n_obs; ++o) {
        std::size_t arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_next; ++j) {
          double v = 0.0;
          for (std::size_t s = 0; s < 4; ++s) v += proj[o * n_next + j][s] * dense[w][s];
          if (v < best) {
            best = v;
            arg = j;
          }
        }
        CHECK(serial[w * n_obs + o] == arg);
      }
    }
  }

  TEST_CASE("min values: serial and parallel agree with a direct scan") {
    ThreadScope threads;
    Rng rng(3);
    const auto vectors = random_vectors(9, 5, rng);
    std::vector<kernels::SparseVector> beliefs;
    std::vector<Belief> dense;
    for (int k = 0; k < 40; ++k) {
      dense.push_back(random_belief(5, rng));
      beliefs.push_back(kernels::SparseVector::from_dense(dense.back().weights()));
    }
    const auto serial = kernels::serial::min_values(vectors, beliefs);
    CHECK(serial == kernels::parallel::min_values(vectors, beliefs));
    for (std::size_t k = 0; k < dense.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : vectors) {
        double x = 0.0;
        for (std::size_t s = 0; s < 5; ++s) x += v[s] * dense[k][s];
        best = std::min(best, x);
      }
      CHECK(std::abs(serial[k] - best) <= 1e-12);
    }
  }

  TEST_CASE("sparse vector keeps only the support") {
    const std::vector<double> d{0.0, 0.25, 0.0, 0.75};
    const auto v = kernels::SparseVector::from_dense(d);
    CHECK(v.index == std::vector<std::size_t>{1, 3});
    CHECK(v.dot(std::vector<double>{9.0, 2.0, 9.0, 4.0}) == 3.5);
  }

  TEST_CASE("thread count is positive") { CHECK(kernels::thread_count() >= 1); }
}
