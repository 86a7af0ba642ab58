// Independent reference computations for the test suite: Romberg
// integration, term-by-term series, brute-force estimator loops and
// batched Monte Carlo with standard errors. These deliberately avoid the
// code paths of the functions they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "medheur/mmd.hpp"
#include "medheur/quadrature.hpp"
#include "medheur/rng.hpp"
#include "medheur/sampling.hpp"

namespace oracle {

// Romberg integration on [a, b] for smooth integrands.
inline double romberg(const std::function<double(double)>& f, double a,
                      double b, int max_level = 22, double tol = 1e-13) {
  std::vector<std::vector<double>> table(1);
  double h = b - a;
  table[0].push_back(0.5 * h * (f(a) + f(b)));
  for (int k = 1; k < max_level; ++k) {
    h *= 0.5;
    double sum = 0.0;
    const std::int64_t points = std::int64_t{1} << (k - 1);
    for (std::int64_t i = 0; i < points; ++i) {
      sum += f(a + (2.0 * static_cast<double>(i) + 1.0) * h);
    }
    table.emplace_back();
    table[k].push_back(0.5 * table[k - 1][0] + h * sum);
    double factor = 1.0;
    for (int j = 1; j <= k; ++j) {
      factor *= 4.0;
      table[k].push_back(table[k][j - 1] +
                         (table[k][j - 1] - table[k - 1][j - 1]) /
                             (factor - 1.0));
    }
    if (k > 3 && std::fabs(table[k][k] - table[k - 1][k - 1]) <=
                     tol * (1.0 + std::fabs(table[k][k]))) {
      return table[k][k];
    }
  }
  return table.back().back();
}

// gamma(a, x) via quadrature after the substitution t = u^2, which removes
// the endpoint singularity for a >= 1/2:
//   int_0^x t^{a-1} e^{-t} dt = 2 int_0^sqrt(x) u^{2a-1} e^{-u^2} du.
inline double lower_incomplete_gamma_quadrature(double a, double x) {
  if (x == 0.0) return 0.0;
  return 2.0 * romberg(
                   [a](double u) {
                     return std::pow(u, 2.0 * a - 1.0) * std::exp(-u * u);
                   },
                   0.0, std::sqrt(x));
}

// I_order(x) with every term computed independently through lgamma.
inline double bessel_i_series(double order, double x, int terms = 400) {
  double sum = 0.0;
  const double log_half_x = std::log(0.5 * x);
  for (int k = 0; k < terms; ++k) {
    const double log_term = (2.0 * k + order) * log_half_x -
                            std::lgamma(k + 1.0) -
                            std::lgamma(order + k + 1.0);
    const double term = std::exp(log_term);
    sum += term;
    if (k > 4 && term < sum * 1e-18) break;
  }
  return sum;
}

// Marcum Q_{1/2}(a, b) via quadrature of the reduced integrand
//   sqrt(2/pi) cosh(a x) exp(-(x^2+a^2)/2),
// obtained by substituting the half-order Bessel function; well defined
// down to a = 0.
inline double marcum_half_quadrature(double a, double b) {
  const double hi = b + a + 45.0;
  return romberg(
      [a](double x) {
        return std::sqrt(2.0 / M_PI) * std::cosh(a * x) *
               std::exp(-0.5 * (x * x + a * a));
      },
      b, hi);
}

// Marcum Q_M(a, b) for general M via quadrature of the defining integral,
// with the Bessel factor from the independent series above.
inline double marcum_general_quadrature(double m_order, double a, double b) {
  const double hi = b + a + 45.0;
  return romberg(
      [m_order, a](double x) {
        if (x <= 0.0) return 0.0;
        return x * std::pow(x / a, m_order - 1.0) *
               std::exp(-0.5 * (x * x + a * a)) *
               bessel_i_series(m_order - 1.0, a * x);
      },
      b, hi);
}

// Generalized inverse of the empirical CDF by exhaustive index arithmetic,
// with the sample-median midpoint rule at p = 1/2.
inline double quantile_exhaustive(const std::vector<double>& sorted, double p) {
  const std::size_t count = sorted.size();
  if (p == 0.5) {
    if (count % 2 == 1) return sorted[count / 2];
    return 0.5 * (sorted[count / 2 - 1] + sorted[count / 2]);
  }
  for (std::size_t k = 1; k <= count; ++k) {
    if (static_cast<double>(k) / static_cast<double>(count) >= p) {
      return sorted[k - 1];
    }
  }
  return sorted[count - 1];
}

// Quadratic-time MMD^2 by a naive loop with the same pair enumeration
// order as the implementation, down to the bit.
inline double mmd_u_brute(const medheur::SplitSample& sample, double nu) {
  const auto k = [nu](const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) {
    return std::exp(-(x - y).squaredNorm() / (2.0 * nu * nu));
  };
  const Eigen::Index m = sample.boundary;
  const Eigen::Index total = sample.size();
  const Eigen::Index n = total - m;
  double s_xx = 0.0, s_yy = 0.0, s_xy = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      s_xx += k(sample.points.row(i), sample.points.row(j));
    }
  }
  for (Eigen::Index i = m; i < total; ++i) {
    for (Eigen::Index j = i + 1; j < total; ++j) {
      s_yy += k(sample.points.row(i), sample.points.row(j));
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = m; j < total; ++j) {
      s_xy += k(sample.points.row(i), sample.points.row(j));
    }
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return 2.0 * s_xx / (md * (md - 1.0)) + 2.0 * s_yy / (nd * (nd - 1.0)) -
         2.0 * s_xy / (md * nd);
}

// Batched Monte Carlo mean: returns (estimate, standard error) from
// n_batches independent batch means.
struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

inline McEstimate batched_mc(const std::function<double(medheur::Rng&)>& draw,
                             std::uint64_t seed, int n_batches,
                             int batch_size) {
  std::vector<double> batch_means(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    medheur::Rng rng(medheur::derive_stream(seed, 101, b));
    double sum = 0.0;
    for (int i = 0; i < batch_size; ++i) sum += draw(rng);
    batch_means[b] = sum / batch_size;
  }
  double mean = 0.0;
  for (double v : batch_means) mean += v;
  mean /= n_batches;
  double ss = 0.0;
  for (double v : batch_means) ss += (v - mean) * (v - mean);
  McEstimate est;
  est.value = mean;
  est.se = std::sqrt(ss / (n_batches - 1.0) / n_batches);
  return est;
}

// sigma_u^2 oracle: outer Monte Carlo over z = (x, y), inner conditional
// expectation by one-dimensional Gauss-Hermite quadrature.
inline McEstimate sigma_u_sq_nested_oracle(const medheur::Scenario& s,
                                           double nu, std::uint64_t seed) {
  const auto& rule = medheur::gauss_hermite(64);
  const double y_shift =
      s.kind == medheur::ScenarioKind::MeanShift ? s.mu : 0.0;
  const double y_scale =
      s.kind == medheur::ScenarioKind::MeanShift ? 1.0 : s.sigma;
  const auto kernel_mean = [&](double v, double shift, double scale) {
    double sum = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i) {
      const double w = shift + M_SQRT2 * scale * rule.nodes[i];
      sum += rule.weights[i] * std::exp(-(v - w) * (v - w) / (2.0 * nu * nu));
    }
    return sum / std::sqrt(M_PI);
  };
  const auto g = [&](medheur::Rng& rng) {
    const double x = rng.gaussian();
    const double y = y_shift + y_scale * rng.gaussian();
    return kernel_mean(x, 0.0, 1.0) + kernel_mean(y, y_shift, y_scale) -
           kernel_mean(x, y_shift, y_scale) - kernel_mean(y, 0.0, 1.0);
  };
  const McEstimate second = batched_mc(
      [&](medheur::Rng& rng) {
        const double v = g(rng);
        return v * v;
      },
      seed, 100, 1000);
  const double mmd = medheur::population_mmd_sq(s, nu);
  McEstimate est;
  est.value = 4.0 * (second.value - mmd * mmd);
  est.se = 4.0 * second.se;
  return est;
}

// One draw of the two-sample kernel h(z, z') under a scenario (dim 1).
inline double draw_h(medheur::Rng& rng, const medheur::Scenario& s, double nu) {
  const double x = rng.gaussian();
  const double xp = rng.gaussian();
  double y = rng.gaussian();
  double yp = rng.gaussian();
  if (s.kind == medheur::ScenarioKind::MeanShift) {
    y += s.mu;
    yp += s.mu;
  } else {
    y *= s.sigma;
    yp *= s.sigma;
  }
  const auto k = [nu](double u, double v) {
    return std::exp(-(u - v) * (u - v) / (2.0 * nu * nu));
  };
  return k(x, xp) + k(y, yp) - k(x, yp) - k(xp, y);
}

}  // namespace oracle
