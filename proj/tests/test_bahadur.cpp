#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "medheur/bahadur.hpp"

using medheur::Scenario;
using medheur::abs_linear;
using medheur::abs_quadratic;
using medheur::estimate_lambda1;
using medheur::lambda1_from_gram;

namespace {

// Top eigenvalue of a symmetric matrix by power iteration, independent of
// the library's eigensolver.
double top_eigenvalue_power_iteration(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    lambda = v.dot(m * v);
  }
  return lambda;
}

}  // namespace

TEST_CASE("gram centering annihilates constant matrices") {
  // all points identical -> Gram of ones -> centered zero matrix
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(6, 6);
  CHECK(lambda1_from_gram(ones) == 0.0);
}

TEST_CASE("lambda1 of an explicit 3-point Gram matrix") {
  // points {0, 1, 2}, nu = 1
  Eigen::MatrixXd gram(3, 3);
  const auto k = [](double a, double b) {
    return std::exp(-(a - b) * (a - b) / 2.0);
  };
  const double points[3] = {0.0, 1.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) gram(i, j) = k(points[i], points[j]);
  }
  Eigen::MatrixXd centered = gram;
  const Eigen::VectorXd rm = gram.rowwise().mean();
  centered.colwise() -= rm;
  centered.rowwise() -= rm.transpose();
  centered.array() += rm.mean();
  const double expected = top_eigenvalue_power_iteration(centered) / 3.0;
  CHECK(lambda1_from_gram(gram) == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("lambda1 estimate is stable across seeds") {
  const Scenario s = Scenario::mean_shift(0.0, 0.5, 1);
  std::vector<double> estimates;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    estimates.push_back(estimate_lambda1(1000, s, 0.674, seed));
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= estimates.size();
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / (estimates.size() - 1.0));
  CHECK(mean > 0.0);
  CHECK(sd / mean <= 0.10);  // 5-seed coefficient of variation
}

TEST_CASE("lambda1 bounds and determinism") {
  const Scenario s = Scenario::variance_scale(2.0, 0.5, 1);
  CHECK_THROWS_AS(estimate_lambda1(5, s, 1.0, 1), std::invalid_argument);
  for (std::uint64_t seed : {11ULL, 12ULL}) {
    const int n = 200;
    const double lam = estimate_lambda1(n, s, 1.0, seed);
    CHECK(lam >= 0.0);
    // lambda1 <= trace of the centered Gram over n; the trace equals
    // n - (sum of all entries)/n <= n, so lambda1 <= 1 always holds here
    CHECK(lam <= 1.0);
    CHECK(estimate_lambda1(n, s, 1.0, seed) == lam);
  }
}

TEST_CASE("quadratic slope arithmetic") {
  CHECK(abs_quadratic(0.0, 0.3).slope == 0.0);
  const auto r = abs_quadratic(0.177250, 0.25);
  CHECK(r.slope == Catch::Approx(0.177250).epsilon(1e-15));
  CHECK(r.lambda1.value() == 0.25);
  CHECK_FALSE(r.sigma_lin_sq.has_value());
  CHECK_THROWS_AS(abs_quadratic(0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(abs_quadratic(0.1, -1.0), std::domain_error);
  // strictly decreasing in lambda1
  CHECK(abs_quadratic(0.5, 0.2).slope > abs_quadratic(0.5, 0.3).slope);
}

TEST_CASE("linear slope arithmetic") {
  CHECK(abs_linear(0.0, 0.7).slope == 0.0);
  const auto r = abs_linear(0.2, 0.5);
  CHECK(r.slope == Catch::Approx(0.04 / 4.0).epsilon(1e-15));
  CHECK(r.sigma_lin_sq.value() == 0.5);
  CHECK_FALSE(r.lambda1.has_value());
  CHECK_THROWS_AS(abs_linear(0.1, 0.0), std::domain_error);
  // doubling mmd_sq exactly quadruples the slope
  CHECK(abs_linear(0.4, 0.5).slope == 4.0 * abs_linear(0.2, 0.5).slope);
}
