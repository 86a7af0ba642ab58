#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "medheur/pairwise.hpp"
#include "medheur/sampling.hpp"
#include "oracles.hpp"

using medheur::BandwidthMethod;
using medheur::PairwiseSummary;
using medheur::Scenario;
using medheur::SplitSample;
using medheur::draw_split_sample;
using medheur::empirical_cdf;
using medheur::empirical_quantile;
using medheur::median_heuristic_bandwidth;
using medheur::median_sq_distance;
using medheur::pairwise_sq_distances;

namespace {

SplitSample sample_from(std::initializer_list<double> values,
                        Eigen::Index boundary = 1) {
  SplitSample s;
  s.points.resize(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) s.points(i++, 0) = v;
  s.boundary = boundary;
  return s;
}

}  // namespace

TEST_CASE("pairwise squared distances on small point sets") {
  CHECK(pairwise_sq_distances(sample_from({0.0, 3.0})).sq_dists ==
        std::vector<double>{9.0});
  CHECK(pairwise_sq_distances(sample_from({0.0, 1.0, 2.0})).sq_dists ==
        std::vector<double>{1.0, 1.0, 4.0});
}

TEST_CASE("pairwise distances match exhaustive enumeration in d = 3") {
  const SplitSample sample =
      draw_split_sample(Scenario::mean_shift(1.0, 0.4, 3), 5, 11);
  const PairwiseSummary summary = pairwise_sq_distances(sample);
  std::vector<double> expected;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = sample.points(i, c) - sample.points(j, c);
        d2 += diff * diff;
      }
      expected.push_back(d2);
    }
  }
  std::sort(expected.begin(), expected.end());
  REQUIRE(summary.sq_dists.size() == expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    CHECK(summary.sq_dists[k] == expected[k]);
  }
}

TEST_CASE("empirical cdf is a right-continuous step function") {
  PairwiseSummary summary{{1.0, 1.0, 4.0}, 3};
  CHECK(empirical_cdf(summary, 0.5) == 0.0);
  CHECK(empirical_cdf(summary, 1.0) == Catch::Approx(2.0 / 3.0));
  CHECK(empirical_cdf(summary, 100.0) == 1.0);
  CHECK(empirical_cdf(summary, 1.0 - 1e-12) == 0.0);
}

TEST_CASE("empirical quantile: generalized inverse plus the median rule") {
  PairwiseSummary odd{{1.0, 1.0, 4.0}, 3};
  CHECK(empirical_quantile(odd, 0.5) == 1.0);  // odd count, central element
  CHECK(empirical_quantile(odd, 0.9) == 4.0);
  CHECK_THROWS_AS(empirical_quantile(odd, 0.0), std::domain_error);
  CHECK_THROWS_AS(empirical_quantile(odd, 1.0), std::domain_error);

  // points {0,1,2,3}: sorted squared distances [1,1,1,4,4,9], even count
  const PairwiseSummary even =
      pairwise_sq_distances(sample_from({0.0, 1.0, 2.0, 3.0}, 2));
  CHECK(even.sq_dists == std::vector<double>{1.0, 1.0, 1.0, 4.0, 4.0, 9.0});
  CHECK(empirical_quantile(even, 0.5) == 2.5);
}

TEST_CASE("empirical quantile equals the exhaustive oracle") {
  std::mt19937_64 engine(7);
  std::uniform_int_distribution<int> size_dist(2, 30);
  std::uniform_real_distribution<double> p_dist(0.01, 0.99);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = std::max(size_dist(engine), 2);
    const SplitSample sample =
        draw_split_sample(Scenario::mean_shift(2.0, 0.5, 2), n, engine());
    const PairwiseSummary summary = pairwise_sq_distances(sample);
    const double p = p_dist(engine);
    CHECK(empirical_quantile(summary, p) ==
          oracle::quantile_exhaustive(summary.sq_dists, p));
    CHECK(empirical_quantile(summary, 0.5) ==
          oracle::quantile_exhaustive(summary.sq_dists, 0.5));
  }
}

TEST_CASE("generalized inverse consistency") {
  const SplitSample sample =
      draw_split_sample(Scenario::variance_scale(2.0, 0.5, 1), 20, 5);
  const PairwiseSummary summary = pairwise_sq_distances(sample);
  for (double p : {0.05, 0.21, 0.37, 0.63, 0.9, 0.99}) {
    const double q = empirical_quantile(summary, p);
    CHECK(empirical_cdf(summary, q) >= p);
    // no strictly smaller distance value reaches p
    const auto it = std::lower_bound(summary.sq_dists.begin(),
                                     summary.sq_dists.end(), q);
    if (it != summary.sq_dists.begin()) {
      CHECK(empirical_cdf(summary, *std::prev(it)) < p);
    }
  }
}

TEST_CASE("median heuristic on tiny samples") {
  const auto one_pair = median_heuristic_bandwidth(sample_from({0.0, 3.0}));
  CHECK(one_pair.h_value == 9.0);
  CHECK(one_pair.nu == Catch::Approx(std::sqrt(4.5)).epsilon(1e-15));
  CHECK(one_pair.method == BandwidthMethod::MedianHeuristic);

  const auto three = median_heuristic_bandwidth(sample_from({0.0, 1.0, 2.0}));
  CHECK(three.h_value == 1.0);
  CHECK(three.nu == Catch::Approx(std::sqrt(0.5)).epsilon(1e-15));

  const auto sqrt_h = median_heuristic_bandwidth(sample_from({0.0, 3.0}), true);
  CHECK(sqrt_h.nu == 3.0);

  CHECK_THROWS_AS(median_heuristic_bandwidth(sample_from({1.0, 1.0, 1.0})),
                  std::runtime_error);
}

TEST_CASE("H_n approaches the theoretical null median") {
  // For P = Q = N(0,1), the limit m solves erf(sqrt(t/4)) = 1/2; root-find
  // with the standard library error function as the oracle.
  double lo = 0.0, hi = 10.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (std::erf(std::sqrt(0.25 * mid)) < 0.5 ? lo : hi) = mid;
  }
  const double m_theory = 0.5 * (lo + hi);
  CHECK(m_theory == Catch::Approx(0.90987).epsilon(1e-4));

  const SplitSample sample =
      draw_split_sample(Scenario::mean_shift(0.0, 0.5, 1), 2000, 321);
  const auto selection = median_heuristic_bandwidth(sample);
  CHECK(std::fabs(selection.h_value - m_theory) <= 0.1 * m_theory);
}

TEST_CASE("permutation, translation invariance and scaling equivariance") {
  SplitSample sample = draw_split_sample(Scenario::mean_shift(1.0, 0.5, 2),
                                         24, 77);
  // quantize the coordinates so that adding small integers is exact in
  // floating point; translation invariance then must hold bitwise
  sample.points = (sample.points * 1048576.0).array().round() / 1048576.0;
  const PairwiseSummary base = pairwise_sq_distances(sample);

  SplitSample shuffled = sample;
  std::mt19937_64 engine(3);
  std::vector<int> perm(24);
  for (int i = 0; i < 24; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), engine);
  for (int i = 0; i < 24; ++i) {
    shuffled.points.row(i) = sample.points.row(perm[i]);
  }
  CHECK(pairwise_sq_distances(shuffled).sq_dists == base.sq_dists);

  SplitSample translated = sample;
  translated.points.rowwise() += Eigen::RowVector2d(7.0, -3.0);
  CHECK(pairwise_sq_distances(translated).sq_dists == base.sq_dists);

  const double c = 3.75;
  SplitSample scaled = sample;
  scaled.points *= c;
  const double h_base = median_heuristic_bandwidth(sample).h_value;
  const double h_scaled = median_heuristic_bandwidth(scaled).h_value;
  CHECK(std::fabs(h_scaled - c * c * h_base) <= 1e-12 * c * c * h_base);
  const double nu_base = median_heuristic_bandwidth(sample).nu;
  const double nu_scaled = median_heuristic_bandwidth(scaled).nu;
  CHECK(std::fabs(nu_scaled - c * nu_base) <= 1e-12 * c * nu_base);
}

TEST_CASE("selection-based median equals the sorted-summary median") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 4 + static_cast<int>(seed % 37);
    const SplitSample sample =
        draw_split_sample(Scenario::variance_scale(1.5, 0.5, 2), n, seed);
    const PairwiseSummary summary = pairwise_sq_distances(sample);
    CHECK(median_sq_distance(sample) == empirical_quantile(summary, 0.5));
  }
}
