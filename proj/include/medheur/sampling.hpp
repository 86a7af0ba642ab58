#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "medheur/rng.hpp"
#include "medheur/scenario.hpp"

namespace medheur {

// A sample of n points in R^d where rows [0, boundary) are i.i.d. from P
// and rows [boundary, n) are i.i.d. from Q, boundary = floor(alpha * n).
struct SplitSample {
  Eigen::MatrixXd points;  // n x d, one point per row
  Eigen::Index boundary = 0;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

// Deterministic given (scenario, n, seed): points are filled row by row,
// coordinate by coordinate, from a single Gaussian stream.
inline SplitSample draw_split_sample(const Scenario& scenario, int n,
                                     std::uint64_t seed) {
  scenario.validate();
  if (n < 2) throw std::invalid_argument("draw_split_sample: n must be >= 2");
  const auto boundary =
      static_cast<Eigen::Index>(std::floor(scenario.alpha * n));
  if (boundary < 1 || boundary > n - 1) {
    throw std::invalid_argument(
        "draw_split_sample: floor(alpha*n) must lie in [1, n-1]");
  }
  SplitSample sample;
  sample.boundary = boundary;
  sample.points.resize(n, scenario.dim);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool from_q = i >= boundary;
    for (Eigen::Index j = 0; j < scenario.dim; ++j) {
      double g = rng.gaussian();
      if (from_q) {
        if (scenario.kind == ScenarioKind::MeanShift) {
          g += scenario.mu;
        } else {
          g *= scenario.sigma;
        }
      }
      sample.points(i, j) = g;
    }
  }
  return sample;
}

}  // namespace medheur
