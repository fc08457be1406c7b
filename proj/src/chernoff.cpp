#include "chernoff.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mdiqkd {

namespace detail {

// Series sum_{k>=2} (+-d)^k / (k(k-1)); converges fast for |d| <= 0.5 and
// avoids the cancellation of the direct formula near d = 0.
namespace {
double dev_series(double d, bool alternating) {
  double step = alternating ? -d : d;
  double power = d * d;  // (+-d)^k with k = 2, sign folded into `step`
  double sum = 0.0;
  for (int k = 2; k < 400; ++k) {
    const double term = power / (static_cast<double>(k) * (k - 1));
    sum += term;
    if (term <= sum * 1e-18) break;
    power *= step;
  }
  return sum;
}
}  // namespace

double dev_pos(double d) {
  if (d <= 0.5) return dev_series(d, true);
  return (1.0 + d) * std::log1p(d) - d;
}

double dev_neg(double d) {
  if (d <= 0.5) return dev_series(d, false);
  const double s = 1.0 - d;
  return s * std::log(s) + 1.0 - s;
}

}  // namespace detail

namespace {

// Bisect a monotone increasing f on [lo, hi] for f(d) = target, running the
// interval down to machine exhaustion. Assumes f(lo) < target <= f(hi).
template <typename F>
double bisect(const F& f, double lo, double hi, double target) {
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void check_nonneg(double v, const char* what) {
  if (!(v >= 0.0))
    throw std::domain_error(std::string(what) + " must be nonnegative");
}

}  // namespace

double delta_expected_lower(double observed, FailureProb xi) {
  check_nonneg(observed, "observed value");
  if (observed == 0.0) return 0.0;
  const double target = -std::log(xi.xi);
  const auto f = [observed](double d) {
    return observed * detail::dev_pos(d) / (1.0 + d);
  };
  double hi = 1.0;
  while (f(hi) < target) {
    hi *= 8.0;
    if (hi > 1e60) break;  // f grows like X*ln(hi); unreachable in practice
  }
  return bisect(f, 0.0, hi, target);
}

double delta_expected_upper(double observed, FailureProb xi) {
  check_nonneg(observed, "observed value");
  if (observed == 0.0) return 0.0;
  const double target = -std::log(xi.xi);
  // Solve in s = 1 - d2: X * dev_neg(1-s) / s = target, decreasing in s.
  const auto g = [observed](double s) {
    return -observed * detail::dev_neg(1.0 - s) / s;
  };
  const double s = bisect(g, 0.0, 1.0, -target);
  return 1.0 - s;
}

double delta_observed_upper(double expected, FailureProb xi) {
  check_nonneg(expected, "expected value");
  if (expected == 0.0) return 0.0;
  const double target = -std::log(xi.xi);
  const auto f = [expected](double d) { return expected * detail::dev_pos(d); };
  double hi = 1.0;
  while (f(hi) < target) {
    hi *= 8.0;
    if (hi > 1e60) break;
  }
  return bisect(f, 0.0, hi, target);
}

double delta_observed_lower(double expected, FailureProb xi) {
  check_nonneg(expected, "expected value");
  if (expected == 0.0) return 0.0;
  const double target = -std::log(xi.xi);
  // dev_neg(1) = 1, so a root in (0,1) exists only if target < Y.
  if (target >= expected) return 1.0;
  const auto g = [expected](double s) {
    return -expected * detail::dev_neg(1.0 - s);
  };
  const double s = bisect(g, 0.0, 1.0, -target);
  return 1.0 - s;
}

double expected_lower(double observed, FailureProb xi) {
  if (observed == 0.0) return 0.0;
  return observed / (1.0 + delta_expected_lower(observed, xi));
}

double expected_upper(double observed, FailureProb xi) {
  check_nonneg(observed, "observed value");
  if (observed == 0.0) return -std::log(xi.xi);
  // Recompute in s to keep full relative precision of 1 - d2.
  const double target = -std::log(xi.xi);
  const auto g = [observed](double s) {
    return -observed * detail::dev_neg(1.0 - s) / s;
  };
  const double s = bisect(g, 0.0, 1.0, -target);
  return observed / s;
}

double observed_upper(double expected, FailureProb xi) {
  if (expected == 0.0) return 0.0;
  return (1.0 + delta_observed_upper(expected, xi)) * expected;
}

double observed_lower(double expected, FailureProb xi) {
  check_nonneg(expected, "expected value");
  if (expected == 0.0) return 0.0;
  const double target = -std::log(xi.xi);
  if (target >= expected) return 0.0;
  const auto g = [expected](double s) {
    return -expected * detail::dev_neg(1.0 - s);
  };
  const double s = bisect(g, 0.0, 1.0, -target);
  return s * expected;
}

}  // namespace mdiqkd
