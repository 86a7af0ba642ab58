#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "medheur/sampling.hpp"

namespace medheur {

// Sorted squared pairwise distances of a sample; exactly n(n-1)/2 entries.
struct PairwiseSummary {
  std::vector<double> sq_dists;  // ascending
  int n = 0;
};

enum class BandwidthMethod { MedianHeuristic, PowerQuad, PowerLin };

inline const char* bandwidth_method_name(BandwidthMethod m) {
  switch (m) {
    case BandwidthMethod::MedianHeuristic: return "median_heuristic";
    case BandwidthMethod::PowerQuad: return "power_quad";
    case BandwidthMethod::PowerLin: return "power_lin";
  }
  return "unknown";
}

// A chosen kernel bandwidth nu, tagged with how it was selected. h_value
// carries the squared-distance quantile behind it (H_n or the theoretical
// median m), so nu == sqrt(h_value / 2) always holds.
struct BandwidthSelection {
  double nu = 0.0;
  BandwidthMethod method = BandwidthMethod::MedianHeuristic;
  double h_value = 0.0;
};

inline PairwiseSummary pairwise_sq_distances(const SplitSample& sample) {
  const Eigen::Index n = sample.size();
  if (n < 2) throw std::invalid_argument("pairwise_sq_distances: need n >= 2");
  PairwiseSummary summary;
  summary.n = static_cast<int>(n);
  summary.sq_dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      summary.sq_dists.push_back(
          (sample.points.row(i) - sample.points.row(j)).squaredNorm());
    }
  }
  std::sort(summary.sq_dists.begin(), summary.sq_dists.end());
  return summary;
}

// Fraction of squared distances <= t (right-continuous step function).
inline double empirical_cdf(const PairwiseSummary& summary, double t) {
  const auto it = std::upper_bound(summary.sq_dists.begin(),
                                   summary.sq_dists.end(), t);
  return static_cast<double>(it - summary.sq_dists.begin()) /
         static_cast<double>(summary.sq_dists.size());
}

// Generalized inverse inf{t : F_n(t) >= p}. For p = 1/2 the sample-median
// midpoint rule applies: with an even number of distances the result is the
// mean of the two central order statistics.
inline double empirical_quantile(const PairwiseSummary& summary, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("empirical_quantile: p must lie in (0,1)");
  }
  const auto count = summary.sq_dists.size();
  if (count == 0) throw std::invalid_argument("empirical_quantile: empty summary");
  if (p == 0.5) {
    if (count % 2 == 1) return summary.sq_dists[count / 2];
    return 0.5 * (summary.sq_dists[count / 2 - 1] + summary.sq_dists[count / 2]);
  }
  // smallest k with k/count >= p, i.e. k = ceil(p*count)
  auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(count)));
  if (k < 1) k = 1;
  if (k > count) k = count;
  return summary.sq_dists[k - 1];
}

// Median heuristic: H_n is the empirical median of the squared pairwise
// distances and nu = sqrt(H_n / 2). Setting sqrt_h_convention picks the
// nu = sqrt(H_n) variant used by some authors.
inline BandwidthSelection median_heuristic_bandwidth(
    const SplitSample& sample, bool sqrt_h_convention = false) {
  const PairwiseSummary summary = pairwise_sq_distances(sample);
  const double h = empirical_quantile(summary, 0.5);
  if (h <= 0.0) {
    throw std::runtime_error(
        "median_heuristic_bandwidth: degenerate sample, median pairwise "
        "distance is zero");
  }
  BandwidthSelection selection;
  selection.method = BandwidthMethod::MedianHeuristic;
  selection.h_value = h;
  selection.nu = sqrt_h_convention ? std::sqrt(h) : std::sqrt(0.5 * h);
  return selection;
}

// Median of the squared pairwise distances by partial selection. Equal to
// empirical_quantile(pairwise_sq_distances(sample), 1/2) including the
// midpoint rule, but O(n^2) instead of O(n^2 log n); used by the replicated
// Monte Carlo experiments.
inline double median_sq_distance(const SplitSample& sample) {
  const Eigen::Index n = sample.size();
  if (n < 2) throw std::invalid_argument("median_sq_distance: need n >= 2");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d.push_back((sample.points.row(i) - sample.points.row(j)).squaredNorm());
    }
  }
  const std::size_t count = d.size();
  const std::size_t k = count / 2;
  std::nth_element(d.begin(), d.begin() + k, d.end());
  const double upper = d[k];
  if (count % 2 == 1) return upper;
  const double lower = *std::max_element(d.begin(), d.begin() + k);
  return 0.5 * (lower + upper);
}

}  // namespace medheur
