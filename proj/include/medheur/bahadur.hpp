#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "medheur/mmd.hpp"
#include "medheur/rng.hpp"
#include "medheur/scenario.hpp"

namespace medheur {

// Approximate Bahadur slope of a test statistic; larger means faster
// p-value decay under the alternative.
struct AbsResult {
  double slope = 0.0;
  StatisticKind statistic_kind = StatisticKind::Quadratic;
  std::optional<double> lambda1;       // quadratic statistic only
  std::optional<double> sigma_lin_sq;  // linear statistic only
};

// Top eigenvalue of the double-centered Gram matrix divided by the sample
// size. An all-identical sample centers to the zero matrix and yields 0
// (degenerate input, surfaced as a zero estimate).
inline double lambda1_from_gram(Eigen::MatrixXd gram) {
  const auto n = gram.rows();
  if (n < 1 || gram.cols() != n) {
    throw std::invalid_argument("lambda1_from_gram: square matrix required");
  }
  const Eigen::VectorXd row_means = gram.rowwise().mean();
  const double grand_mean = row_means.mean();
  gram.colwise() -= row_means;
  gram.rowwise() -= row_means.transpose();
  gram.array() += grand_mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("lambda1_from_gram: eigen solver failed");
  }
  return std::fmax(0.0, solver.eigenvalues().maxCoeff()) /
         static_cast<double>(n);
}

// Empirical estimate of the largest eigenvalue of the centered Gaussian
// kernel integral operator: draw points from the alpha-mixture of P and Q,
// then center the Gram matrix and take its top eigenvalue over the sample
// size.
inline double estimate_lambda1(int sample_size, const Scenario& scenario,
                               double nu, std::uint64_t seed) {
  scenario.validate();
  if (sample_size < 10) {
    throw std::invalid_argument("estimate_lambda1: sample_size must be >= 10");
  }
  const GaussianKernel kernel(nu);
  Rng rng(seed);
  Eigen::MatrixXd points(sample_size, scenario.dim);
  for (int i = 0; i < sample_size; ++i) {
    const bool from_p = rng.uniform01() < scenario.alpha;
    for (int j = 0; j < scenario.dim; ++j) {
      double g = rng.gaussian();
      if (!from_p) {
        if (scenario.kind == ScenarioKind::MeanShift) {
          g += scenario.mu;
        } else {
          g *= scenario.sigma;
        }
      }
      points(i, j) = g;
    }
  }
  Eigen::MatrixXd gram(sample_size, sample_size);
  for (int i = 0; i < sample_size; ++i) {
    gram(i, i) = 1.0;
    for (int j = i + 1; j < sample_size; ++j) {
      const double k = kernel(points.row(i), points.row(j));
      gram(i, j) = k;
      gram(j, i) = k;
    }
  }
  return lambda1_from_gram(std::move(gram));
}

// ABS of n MMD_u^2: MMD^2 / (4 lambda_1).
inline AbsResult abs_quadratic(double mmd_sq, double lambda1) {
  if (!(lambda1 > 0.0)) {
    throw std::domain_error("abs_quadratic: lambda1 must be > 0");
  }
  AbsResult result;
  result.statistic_kind = StatisticKind::Quadratic;
  result.lambda1 = lambda1;
  result.slope = mmd_sq / (4.0 * lambda1);
  return result;
}

// ABS of sqrt(n) linMMD^2: MMD^4 / (8 sigma_l^2).
inline AbsResult abs_linear(double mmd_sq, double sigma_lin_sq_value) {
  if (!(sigma_lin_sq_value > 0.0)) {
    throw std::domain_error("abs_linear: sigma_lin_sq must be > 0");
  }
  AbsResult result;
  result.statistic_kind = StatisticKind::Linear;
  result.sigma_lin_sq = sigma_lin_sq_value;
  result.slope = mmd_sq * mmd_sq / (8.0 * sigma_lin_sq_value);
  return result;
}

}  // namespace medheur
