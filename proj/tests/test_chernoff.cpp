#include "chernoff.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

#include "oracles.hpp"

using namespace mdiqkd;

namespace {
double log_uniform(std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(gen));
}
}  // namespace

TEST_CASE("failure probability validation") {
  CHECK_THROWS_AS(FailureProb(0.0), std::domain_error);
  CHECK_THROWS_AS(FailureProb(1.0), std::domain_error);
  CHECK_THROWS_AS(FailureProb(-0.1), std::domain_error);
  CHECK_THROWS_AS(expected_lower(-1.0, FailureProb(0.5)), std::domain_error);
  CHECK_NOTHROW(FailureProb(1e-300));
}

TEST_CASE("zero-input conventions") {
  const FailureProb xi(0.01);
  CHECK(expected_lower(0.0, xi) == 0.0);
  CHECK(observed_upper(0.0, xi) == 0.0);
  CHECK(observed_lower(0.0, xi) == 0.0);
  // E^U(0, xi) = ln(1/xi), the exact zero-observation bound.
  CHECK(expected_upper(0.0, FailureProb(std::exp(-5.0))) ==
        doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("xi -> 1 identity limits") {
  const FailureProb near_one(1.0 - 1e-12);
  CHECK(expected_lower(1000.0, near_one) == doctest::Approx(1000.0).epsilon(1e-6));
  CHECK(expected_upper(1000.0, near_one) == doctest::Approx(1000.0).epsilon(1e-6));
  CHECK(observed_upper(50.0, near_one) == doctest::Approx(50.0).epsilon(1e-6));
  CHECK(observed_lower(50.0, near_one) == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("observed_lower clamps when no root exists") {
  // e^{-5} is far above 1e-10, so the equation has no root in (0,1).
  CHECK(observed_lower(5.0, FailureProb(1e-10)) == 0.0);
  CHECK(delta_observed_lower(5.0, FailureProb(1e-10)) == 1.0);
}

TEST_CASE("frozen oracle values") {
  // Computed with the long-double bisection oracle on the raw equations.
  const FailureProb xi(1e-10);
  CHECK(expected_lower(1e6, xi) ==
        doctest::Approx(993229.20145408809).epsilon(1e-12));
  CHECK(delta_expected_lower(1e6, xi) ==
        doctest::Approx(0.0068169547733790498).epsilon(1e-11));
  CHECK(expected_upper(1e4, xi) ==
        doctest::Approx(10694.050636903260).epsilon(1e-12));
  CHECK(delta_expected_upper(1e4, xi) ==
        doctest::Approx(0.064900631245209822).epsilon(1e-11));
  CHECK(observed_upper(100.0, xi) ==
        doctest::Approx(175.16620178570145).epsilon(1e-12));
  CHECK(observed_lower(1e5, xi) ==
        doctest::Approx(97861.723062260155).epsilon(1e-12));
}

TEST_CASE("residuals reproduce xi to 1e-12 relative") {
  std::mt19937_64 gen(42);
  for (int i = 0; i < 500; ++i) {
    const double x = log_uniform(gen, 1.0, 1e12);
    const double xi = log_uniform(gen, 1e-15, 0.5);
    const FailureProb fp(xi);
    CHECK(oracle::residual(
              [x](long double d) {
                return oracle::log_lhs_expected_lower(x, d);
              },
              delta_expected_lower(x, fp), xi) < 1e-12);
    CHECK(oracle::residual(
              [x](long double d) {
                return oracle::log_lhs_expected_upper(x, d);
              },
              delta_expected_upper(x, fp), xi) < 1e-12);
    CHECK(oracle::residual(
              [x](long double d) {
                return oracle::log_lhs_observed_upper(x, d);
              },
              delta_observed_upper(x, fp), xi) < 1e-12);
    const double d2p = delta_observed_lower(x, fp);
    if (d2p < 1.0) {  // interior root exists
      CHECK(oracle::residual(
                [x](long double d) {
                  return oracle::log_lhs_observed_lower(x, d);
                },
                d2p, xi) < 1e-12);
    }
  }
}

TEST_CASE("ordering and monotonicity") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 300; ++i) {
    const double x = log_uniform(gen, 1.0, 1e12);
    const double xi = log_uniform(gen, 1e-15, 0.5);
    const FailureProb fp(xi);
    const double el = expected_lower(x, fp);
    const double eu = expected_upper(x, fp);
    CHECK(el < x);
    CHECK(x < eu);
    CHECK(observed_lower(x, fp) <= x);
    CHECK(x <= observed_upper(x, fp));

    // Nondecreasing in the first argument.
    const double x2 = x * 1.3;
    CHECK(expected_lower(x2, fp) >= el);
    CHECK(expected_upper(x2, fp) >= eu);
    CHECK(observed_upper(x2, fp) >= observed_upper(x, fp));
    CHECK(observed_lower(x2, fp) >= observed_lower(x, fp));

    // Lower bounds grow with xi, upper bounds shrink.
    const FailureProb larger(std::min(0.9, xi * 10.0));
    CHECK(expected_lower(x, larger) >= el);
    CHECK(expected_upper(x, larger) <= eu);
    CHECK(observed_lower(x, larger) >= observed_lower(x, fp));
    CHECK(observed_upper(x, larger) <= observed_upper(x, fp));
  }
}

TEST_CASE("superadditivity of expected_lower, subadditivity of expected_upper") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 300; ++i) {
    const double a = log_uniform(gen, 1.0, 1e10);
    const double b = log_uniform(gen, 1.0, 1e10);
    const double xi = log_uniform(gen, 1e-15, 0.5);
    const FailureProb fp(xi);
    const double sum_l = expected_lower(a + b, fp);
    const double parts_l = expected_lower(a, fp) + expected_lower(b, fp);
    CHECK(sum_l >= parts_l * (1.0 - 1e-12));
    const double sum_u = expected_upper(a + b, fp);
    const double parts_u = expected_upper(a, fp) + expected_upper(b, fp);
    CHECK(sum_u <= parts_u * (1.0 + 1e-12));
  }
}
