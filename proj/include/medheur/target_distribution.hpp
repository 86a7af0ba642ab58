#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "medheur/pairwise.hpp"
#include "medheur/scenario.hpp"
#include "medheur/special_functions.hpp"

namespace medheur {

// The target mixture T of the squared pairwise distances: components
// T_XX ~ ||X-X'||^2, T_YY ~ ||Y-Y'||^2, T_XY ~ ||X-Y||^2 with weights
// alpha^2, (1-alpha)^2, 2 alpha (1-alpha). The analytic CDF/PDF below are
// the 1-d Gaussian closed forms; the empirical distance distribution
// converges to T pointwise as n grows.
class TargetDistribution {
 public:
  explicit TargetDistribution(const Scenario& scenario) : scenario_(scenario) {
    scenario.validate();
  }

  const Scenario& scenario() const { return scenario_; }
  double weight_xx() const { return scenario_.alpha * scenario_.alpha; }
  double weight_yy() const {
    return (1.0 - scenario_.alpha) * (1.0 - scenario_.alpha);
  }
  double weight_xy() const {
    return 2.0 * scenario_.alpha * (1.0 - scenario_.alpha);
  }

  double cdf(double t) const {
    require_univariate();
    if (t <= 0.0) return 0.0;
    const double a = scenario_.alpha;
    if (scenario_.kind == ScenarioKind::MeanShift) {
      // T_XX, T_YY ~ 2 chi^2_1; T_XY ~ twice a noncentral chi^2_1 with
      // noncentrality mu^2/2, whose CDF is 1 - Q_{1/2}(mu/sqrt2, sqrt(t/2)).
      const double mu = std::fabs(scenario_.mu);
      const double intra = regularized_lower_gamma(0.5, 0.25 * t);
      const double cross =
          1.0 - marcum_q(0.5, mu / M_SQRT2, std::sqrt(0.5 * t));
      return (weight_xx() + weight_yy()) * intra + weight_xy() * cross;
    }
    const double s2 = scenario_.sigma * scenario_.sigma;
    return a * a * regularized_lower_gamma(0.5, 0.25 * t) +
           (1.0 - a) * (1.0 - a) *
               regularized_lower_gamma(0.5, 0.25 * t / s2) +
           2.0 * a * (1.0 - a) *
               regularized_lower_gamma(0.5, 0.5 * t / (s2 + 1.0));
  }

  double pdf(double t) const {
    require_univariate();
    if (!(t > 0.0)) throw std::domain_error("TargetDistribution::pdf: t must be > 0");
    const double a = scenario_.alpha;
    if (scenario_.kind == ScenarioKind::MeanShift) {
      const double mu = std::fabs(scenario_.mu);
      const double intra = (weight_xx() + weight_yy()) * std::exp(-0.25 * t);
      const double cross = weight_xy() *
                           std::exp(-0.25 * (mu * mu + t)) *
                           std::cosh(0.5 * mu * std::sqrt(t));
      return (intra + cross) / (2.0 * std::sqrt(M_PI * t));
    }
    const double s = scenario_.sigma;
    const double s2 = s * s;
    return a * a * std::exp(-0.25 * t) / (2.0 * std::sqrt(M_PI * t)) +
           (1.0 - a) * (1.0 - a) * std::exp(-0.25 * t / s2) /
               (2.0 * s * std::sqrt(M_PI * t)) +
           2.0 * a * (1.0 - a) * std::exp(-0.5 * t / (s2 + 1.0)) /
               std::sqrt(2.0 * (s2 + 1.0) * M_PI * t);
  }

  // Solves F_T(t) = p. Bracketed bisection narrows the interval, then
  // Newton steps with the analytic density finish to |F - p| <= 1e-10;
  // whenever the density is too flat (the plateau regime of large mu) or a
  // Newton step leaves the bracket, the solver falls back to bisection.
  double quantile(double p) const {
    require_univariate();
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("TargetDistribution::quantile: p must lie in (0,1)");
    }
    const double s2 = scenario_.sigma * scenario_.sigma;
    const double mu = std::fabs(scenario_.mu);
    double lo = 1e-12;
    double hi = std::fmax(4.0, std::fmax(8.0 * s2, 2.0 * mu * mu + 16.0));
    for (int k = 0; k < 200 && cdf(hi) < p; ++k) hi *= 2.0;
    if (cdf(hi) < p) {
      throw std::runtime_error(
          "TargetDistribution::quantile: failed to bracket the target "
          "probability");
    }
    // coarse bisection
    while (hi - lo > 1e-3 * (1.0 + hi)) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < p ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
      const double err = cdf(t) - p;
      if (std::fabs(err) <= 1e-10) return t;
      (err < 0.0 ? lo : hi) = t;
      const double density = pdf(t);
      double next = (density >= 1e-12) ? t - err / density : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    if (std::fabs(cdf(t) - p) <= 1e-8) return t;  // flat-CDF regime
    throw std::runtime_error(
        "TargetDistribution::quantile: solver did not converge");
  }

  // The large-n limit of the median heuristic: nu = sqrt(m/2) with m the
  // theoretical median of T.
  BandwidthSelection median_bandwidth_theoretical() const {
    const double m = quantile(0.5);
    BandwidthSelection selection;
    selection.method = BandwidthMethod::MedianHeuristic;
    selection.h_value = m;
    selection.nu = std::sqrt(0.5 * m);
    return selection;
  }

 private:
  void require_univariate() const {
    if (scenario_.dim != 1) {
      throw std::invalid_argument(
          "TargetDistribution: analytic formulas require dim == 1");
    }
  }

  Scenario scenario_;
};

struct GapBound {
  double probability_bound = 0.0;  // 1 - 75/lambda
  double gap = 0.0;                // ||mu_X - mu_Y||^2 / 25
};

// Separation lemma bound: if ||mu_X - mu_Y||^2 >= lambda (tr Sx + tr Sy)
// with lambda > 75, then max(T_XX, T_YY) + gap < T_XY holds with
// probability at least 1 - 75/lambda.
inline GapBound gap_threshold(const Eigen::VectorXd& mu_x,
                              const Eigen::VectorXd& mu_y,
                              double trace_sigma_x, double trace_sigma_y,
                              double lambda) {
  if (!(lambda > 75.0)) {
    throw std::invalid_argument("gap_threshold: lambda must exceed 75");
  }
  if (trace_sigma_x < 0.0 || trace_sigma_y < 0.0) {
    throw std::invalid_argument("gap_threshold: traces must be nonnegative");
  }
  if (mu_x.size() != mu_y.size()) {
    throw std::invalid_argument("gap_threshold: mean dimension mismatch");
  }
  const double separation = (mu_x - mu_y).squaredNorm();
  if (separation < lambda * (trace_sigma_x + trace_sigma_y)) {
    throw std::invalid_argument(
        "gap_threshold: separation condition "
        "||mu_X-mu_Y||^2 >= lambda (tr Sx + tr Sy) fails");
  }
  return GapBound{1.0 - 75.0 / lambda, separation / 25.0};
}

}  // namespace medheur
