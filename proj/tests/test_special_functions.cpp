#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "medheur/special_functions.hpp"
#include "oracles.hpp"

using medheur::bessel_i;
using medheur::lower_incomplete_gamma;
using medheur::marcum_q;

TEST_CASE("lower incomplete gamma on analytic cases") {
  // gamma(1, x) = 1 - e^{-x}
  CHECK(lower_incomplete_gamma(1.0, 2.0) ==
        Catch::Approx(1.0 - std::exp(-2.0)).epsilon(1e-13));
  CHECK(lower_incomplete_gamma(0.5, 0.0) == 0.0);
  // gamma(a, x) -> Gamma(a) as x -> infinity
  CHECK(lower_incomplete_gamma(0.5, 60.0) ==
        Catch::Approx(std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("lower incomplete gamma against the quadrature oracle") {
  CHECK(lower_incomplete_gamma(0.5, 1.0) ==
        Catch::Approx(oracle::lower_incomplete_gamma_quadrature(0.5, 1.0))
            .epsilon(1e-10));
  for (double a : {0.5, 1.0, 2.0}) {
    for (double x : {0.1, 1.0, 10.0}) {
      const double expected = oracle::lower_incomplete_gamma_quadrature(a, x);
      INFO("a=" << a << " x=" << x);
      CHECK(lower_incomplete_gamma(a, x) ==
            Catch::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("lower incomplete gamma domain and monotonicity") {
  CHECK_THROWS_AS(lower_incomplete_gamma(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(lower_incomplete_gamma(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(lower_incomplete_gamma(0.5, -0.1), std::domain_error);
  for (double a : {0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (double x = 0.0; x <= 20.0; x += 0.25) {
      const double g = lower_incomplete_gamma(a, x);
      CHECK(g >= prev);
      const double p = g / std::tgamma(a);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0 + 1e-14);
      prev = g;
    }
  }
}

TEST_CASE("bessel I at special points") {
  CHECK(bessel_i(0.0, 0.0) == 1.0);
  CHECK(bessel_i(1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(bessel_i(0.0, -1.0), std::domain_error);
  // I_{-1/2}(x) = sqrt(2/(pi x)) cosh(x)
  CHECK(bessel_i(-0.5, 1.0) ==
        Catch::Approx(std::sqrt(2.0 / M_PI) * std::cosh(1.0)).epsilon(1e-12));
  CHECK(bessel_i(-0.5, 3.0) ==
        Catch::Approx(oracle::bessel_i_series(-0.5, 3.0)).epsilon(1e-12));
}

TEST_CASE("bessel I half-order identity over (0, 30]") {
  for (double x = 0.25; x <= 30.0; x += 0.25) {
    const double lhs = bessel_i(-0.5, x) * std::sqrt(M_PI * x / 2.0);
    CHECK(lhs == Catch::Approx(std::cosh(x)).epsilon(1e-10));
  }
}

TEST_CASE("bessel I against the series oracle") {
  for (double order : {-0.5, 0.0, 0.5, 1.5}) {
    for (double x : {0.1, 1.0, 3.0, 10.0}) {
      INFO("order=" << order << " x=" << x);
      CHECK(bessel_i(order, x) ==
            Catch::Approx(oracle::bessel_i_series(order, x)).epsilon(1e-11));
    }
  }
}

TEST_CASE("marcum Q boundary values and domain") {
  CHECK(marcum_q(0.5, 2.0, 0.0) == 1.0);
  CHECK(marcum_q(1.0, 0.5, 0.0) == 1.0);
  CHECK_THROWS_AS(marcum_q(0.5, -1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(marcum_q(0.5, 1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(marcum_q(0.0, 1.0, 1.0), std::domain_error);
  // limit 0 at b -> infinity
  CHECK(marcum_q(0.5, 1.0, 40.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("marcum Q_{1/2} against the quadrature oracle") {
  // a -> 0: upper tail of a chi with one degree of freedom
  CHECK(marcum_q(0.5, 0.0, 1.0) ==
        Catch::Approx(oracle::marcum_half_quadrature(0.0, 1.0)).epsilon(1e-10));
  CHECK(marcum_q(0.5, 1.0, 2.0) ==
        Catch::Approx(oracle::marcum_half_quadrature(1.0, 2.0)).epsilon(1e-10));
  for (double a : {0.0, 1.0, 3.0}) {
    for (double b : {0.1, 1.0, 5.0}) {
      INFO("a=" << a << " b=" << b);
      CHECK(marcum_q(0.5, a, b) ==
            Catch::Approx(oracle::marcum_half_quadrature(a, b)).epsilon(1e-8));
    }
  }
}

TEST_CASE("marcum Q general order matches the defining-integral oracle") {
  for (double m : {1.0, 1.5, 2.0}) {
    for (double a : {0.5, 1.0, 3.0}) {
      for (double b : {0.5, 1.0, 4.0}) {
        INFO("M=" << m << " a=" << a << " b=" << b);
        CHECK(marcum_q(m, a, b) ==
              Catch::Approx(oracle::marcum_general_quadrature(m, a, b))
                  .epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("marcum Q is nonincreasing in b") {
  for (double a : {0.0, 1.0, 3.0}) {
    double prev = 1.0;
    for (double b = 0.0; b <= 10.0; b += 0.1) {
      const double q = marcum_q(0.5, a, b);
      CHECK(q <= prev + 1e-14);
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      prev = q;
    }
  }
}
