#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>

namespace medheur {

struct GaussHermiteRule {
  Eigen::VectorXd nodes;    // roots of the physicists' Hermite polynomial
  Eigen::VectorXd weights;  // sum to sqrt(pi)
};

// Gauss-Hermite nodes/weights (weight function e^{-x^2}) via Golub-Welsch
// on the symmetric tridiagonal Jacobi matrix. Cached per order.
inline const GaussHermiteRule& gauss_hermite(int n) {
  static std::map<int, GaussHermiteRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gauss_hermite: eigen decomposition failed");
  }
  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[k] = sqrt_pi * v0 * v0;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

// E[f(Z)] for Z ~ N(mean, sd^2) by Gauss-Hermite quadrature.
inline double gaussian_expectation(const std::function<double(double)>& f,
                                   double mean, double sd, int order = 128) {
  const GaussHermiteRule& rule = gauss_hermite(order);
  const double scale = M_SQRT2 * sd;
  double sum = 0.0;
  for (int k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * f(mean + scale * rule.nodes[k]);
  }
  return sum / std::sqrt(M_PI);
}

// Var[f(Z)] for Z ~ N(mean, sd^2), cancellation-free: the variance is the
// half mean squared difference over an independent pair, evaluated on the
// tensor Gauss-Hermite grid. Callers supply a stable difference
// f(z1) - f(z2) so that nearly-constant f does not lose precision.
inline double gaussian_variance_pairdiff(
    const std::function<double(double, double)>& f_diff, double mean,
    double sd, int order = 128) {
  const GaussHermiteRule& rule = gauss_hermite(order);
  const double scale = M_SQRT2 * sd;
  const int n = static_cast<int>(rule.nodes.size());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double zi = mean + scale * rule.nodes[i];
    for (int j = 0; j < n; ++j) {
      const double zj = mean + scale * rule.nodes[j];
      const double d = f_diff(zi, zj);
      sum += rule.weights[i] * rule.weights[j] * d * d;
    }
  }
  return 0.5 * sum / M_PI;
}

// e^{-p} - e^{-q} for p, q >= 0 without overflow or cancellation blowup.
inline double exp_diff(double p, double q) {
  const double lo = std::fmin(p, q);
  const double mag = -std::expm1(-std::fabs(p - q));
  return (q >= p ? 1.0 : -1.0) * std::exp(-lo) * mag;
}

}  // namespace medheur
