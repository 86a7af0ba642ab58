#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace medheur {

// Standard normal CDF and upper tail via erfc (accurate in both tails).
inline double gaussian_cdf(double z) {
  return 0.5 * std::erfc(-z / M_SQRT2);
}

inline double gaussian_upper_tail(double z) {
  return 0.5 * std::erfc(z / M_SQRT2);
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by its power series,
// for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int k = 0; k < 500; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by continued fraction
// (modified Lentz), for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("regularized_lower_gamma: a must be > 0");
  if (x < 0.0) throw std::domain_error("regularized_lower_gamma: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

// Lower incomplete gamma gamma(a,x) = int_0^x t^{a-1} e^{-t} dt.
inline double lower_incomplete_gamma(double a, double x) {
  return regularized_lower_gamma(a, x) * std::tgamma(a);
}

// Modified Bessel function of the first kind, I_order(x), by power series.
// All series terms are positive, so there is no cancellation; adequate for
// the moderate arguments used here (x well below overflow of e^x).
inline double bessel_i(double order, double x) {
  if (x < 0.0) throw std::domain_error("bessel_i: x must be >= 0");
  if (order < -0.5) throw std::domain_error("bessel_i: order must be >= -1/2");
  if (x == 0.0) {
    if (order == 0.0) return 1.0;
    if (order > 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();  // I_{-1/2} diverges at 0
  }
  const double q = 0.25 * x * x;
  double term = std::exp(order * std::log(0.5 * x) - std::lgamma(order + 1.0));
  double sum = term;
  for (int k = 0; k < 2000; ++k) {
    term *= q / ((k + 1.0) * (order + k + 1.0));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

namespace detail {

// Integrand of the defining Marcum Q integral, evaluated through logs.
inline double marcum_integrand(double m_order, double a, double x) {
  if (x <= 0.0) return 0.0;
  const double bessel = bessel_i(m_order - 1.0, a * x);
  if (bessel <= 0.0) return 0.0;
  const double lg = std::log(x) + (m_order - 1.0) * (std::log(x) - std::log(a)) -
                    0.5 * (x * x + a * a) + std::log(bessel);
  return std::exp(lg);
}

inline double adaptive_simpson_rec(double (*f)(double, double, double),
                                   double m_order, double a, double lo,
                                   double hi, double flo, double fmid,
                                   double fhi, double whole, double tol,
                                   int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double fl = f(m_order, a, lmid);
  const double fr = f(m_order, a, rmid);
  const double left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, m_order, a, lo, mid, flo, fl, fmid, left,
                              0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m_order, a, mid, hi, fmid, fr, fhi, right,
                              0.5 * tol, depth - 1);
}

}  // namespace detail

// Marcum Q-function Q_M(a,b), the upper tail of a noncentral chi
// distribution. M = 1/2 reduces exactly to Gaussian tails,
//   Q_{1/2}(a,b) = Qbar(b-a) + Qbar(b+a),
// which is the case needed by the noncentral chi-squared CDF with one
// degree of freedom. a = 0 reduces to a central chi-squared tail. Other
// (M, a) go through adaptive quadrature of the defining integral.
inline double marcum_q(double m_order, double a, double b) {
  if (!(m_order > 0.0)) throw std::domain_error("marcum_q: M must be > 0");
  if (a < 0.0 || b < 0.0) throw std::domain_error("marcum_q: a, b must be >= 0");
  if (b == 0.0) return 1.0;
  if (m_order == 0.5) {
    return gaussian_upper_tail(b - a) + gaussian_upper_tail(b + a);
  }
  if (a == 0.0) {
    return 1.0 - regularized_lower_gamma(m_order, 0.5 * b * b);
  }
  const double hi = a + 40.0 + b;
  if (b >= hi) return 0.0;
  const double mid = 0.5 * (b + hi);
  const double flo = detail::marcum_integrand(m_order, a, b);
  const double fmid = detail::marcum_integrand(m_order, a, mid);
  const double fhi = detail::marcum_integrand(m_order, a, hi);
  const double whole = (hi - b) / 6.0 * (flo + 4.0 * fmid + fhi);
  const double q = detail::adaptive_simpson_rec(
      detail::marcum_integrand, m_order, a, b, hi, flo, fmid, fhi, whole,
      1e-13, 48);
  return std::fmin(1.0, std::fmax(0.0, q));
}

}  // namespace medheur
