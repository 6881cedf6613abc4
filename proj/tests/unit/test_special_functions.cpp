#include <catch_amalgamated.hpp>

#include <cmath>

#include "apt/special_functions.hpp"
#include "support/oracles.hpp"

using namespace apt::stats;
using Catch::Matchers::WithinAbs;

TEST_CASE("regularized gamma matches the 50-digit oracle") {
  for (double a : {0.5, 1.0, 1.5, 2.0, 4.5, 10.0, 30.0, 100.0}) {
    for (double x : {0.0, 0.01, 0.3, 1.0, 2.5, 5.0, 9.0, 20.0, 60.0, 150.0}) {
      INFO("a=" << a << " x=" << x);
      const double want = oracle::gamma_p(a, x);
      CHECK_THAT(regularized_gamma_p(a, x), WithinAbs(want, 1e-10));
      CHECK_THAT(regularized_gamma_q(a, x), WithinAbs(1.0 - want, 1e-10));
    }
  }
}

TEST_CASE("regularized beta matches the 50-digit oracle") {
  for (double a : {0.5, 1.0, 2.0, 3.5, 10.0, 50.0}) {
    for (double b : {0.5, 1.0, 2.5, 7.0, 40.0}) {
      for (double x : {0.0, 0.001, 0.1, 0.3, 0.5, 0.7, 0.95, 0.999, 1.0}) {
        INFO("a=" << a << " b=" << b << " x=" << x);
        CHECK_THAT(regularized_beta(a, b, x), WithinAbs(oracle::beta_i(a, b, x), 1e-10));
      }
    }
  }
}

TEST_CASE("closed forms") {
  for (double x : {0.1, 1.0, 3.0}) CHECK_THAT(regularized_gamma_p(1.0, x), WithinAbs(1.0 - std::exp(-x), 1e-14));
  for (double x : {0.2, 0.5, 0.9}) CHECK_THAT(regularized_beta(1.0, 1.0, x), WithinAbs(x, 1e-14));
  CHECK_THAT(chi_square_sf(3.841458820694124, 1.0), WithinAbs(0.05, 1e-12));
  CHECK_THAT(chi_square_sf(2.0, 2.0), WithinAbs(std::exp(-1.0), 1e-14));
  // F(1, d) upper tail equals the two-sided t tail.
  CHECK_THAT(f_sf(1.0, 1.0, 1.0), WithinAbs(0.5, 1e-12));
  CHECK(chi_square_sf(0.0, 3.0) == 1.0);
}
