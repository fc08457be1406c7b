#pragma once

#include <stdexcept>

namespace mdiqkd {

// Failure probability of a single Chernoff estimate.
struct FailureProb {
  double xi;
  explicit FailureProb(double value) : xi(value) {
    if (!(value > 0.0 && value < 1.0))
      throw std::domain_error("failure probability must lie in (0,1)");
  }
};

// Chernoff-bound conversions between an observed sum of indicator-like
// variables and its expectation, at failure probability xi.
//
//   expected_lower(X, xi) = X / (1 + d1),  (e^{d1}/(1+d1)^{1+d1})^{X/(1+d1)} = xi
//   expected_upper(X, xi) = X / (1 - d2),  (e^{-d2}/(1-d2)^{1-d2})^{X/(1-d2)} = xi
//   observed_upper(Y, xi) = (1 + d1') Y,   (e^{d1'}/(1+d1')^{1+d1'})^{Y} = xi
//   observed_lower(Y, xi) = (1 - d2') Y,   (e^{-d2'}/(1-d2')^{1-d2'})^{Y} = xi
//
// Zero-input conventions: expected_lower(0) = 0, expected_upper(0) = ln(1/xi)
// (the exact zero-observation bound), observed_upper(0) = observed_lower(0) = 0
// (a zero expectation produces zero counts with certainty; degenerate case).
// observed_lower returns 0 when no root exists in (0,1), i.e. xi <= e^{-Y}.
double expected_lower(double observed, FailureProb xi);
double expected_upper(double observed, FailureProb xi);
double observed_upper(double expected, FailureProb xi);
double observed_lower(double expected, FailureProb xi);

// Roots of the four transcendental equations above, exposed so callers can
// verify residuals. The degenerate inputs return 0.
double delta_expected_lower(double observed, FailureProb xi);
double delta_expected_upper(double observed, FailureProb xi);
double delta_observed_upper(double expected, FailureProb xi);
double delta_observed_lower(double expected, FailureProb xi);

namespace detail {
// (1+d)ln(1+d) - d and (1-d)ln(1-d) + d, evaluated without cancellation.
double dev_pos(double d);
double dev_neg(double d);
}  // namespace detail

}  // namespace mdiqkd
