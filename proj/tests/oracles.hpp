// Test-only oracles, deliberately independent of the implementation paths
// they check: long-double bisection on the raw transcendental equations, and
// a vertex-enumeration LP solver for the joint-constraint problem.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

// log of the four Chernoff left-hand sides, direct formulas.
inline long double log_lhs_expected_lower(long double x, long double d) {
  return (x / (1.0L + d)) * (d - (1.0L + d) * std::log(1.0L + d));
}
inline long double log_lhs_expected_upper(long double x, long double d) {
  return (x / (1.0L - d)) * (-d - (1.0L - d) * std::log(1.0L - d));
}
inline long double log_lhs_observed_upper(long double y, long double d) {
  return y * (d - (1.0L + d) * std::log(1.0L + d));
}
inline long double log_lhs_observed_lower(long double y, long double d) {
  return y * (-d - (1.0L - d) * std::log(1.0L - d));
}

// All four are decreasing in d; solve log_lhs(d) = log(xi) by bisection.
template <typename F>
long double bisect_decreasing(const F& f, long double lo, long double hi,
                              long double target, int iterations = 200) {
  for (int i = 0; i < iterations; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5L * (lo + hi);
}

inline long double delta1_oracle(long double x, long double xi) {
  const long double target = std::log(xi);
  long double hi = 1.0L;
  while (log_lhs_expected_lower(x, hi) > target && hi < 1e30L) hi *= 4.0L;
  return bisect_decreasing(
      [x](long double d) { return log_lhs_expected_lower(x, d); }, 0.0L, hi,
      target);
}

inline long double delta2_oracle(long double x, long double xi) {
  const long double target = std::log(xi);
  return bisect_decreasing(
      [x](long double d) { return log_lhs_expected_upper(x, d); }, 0.0L, 1.0L,
      target);
}

inline long double delta1p_oracle(long double y, long double xi) {
  const long double target = std::log(xi);
  long double hi = 1.0L;
  while (log_lhs_observed_upper(y, hi) > target && hi < 1e30L) hi *= 4.0L;
  return bisect_decreasing(
      [y](long double d) { return log_lhs_observed_upper(y, d); }, 0.0L, hi,
      target);
}

// Returns 1 when no root exists in (0,1) (xi <= e^{-y}).
inline long double delta2p_oracle(long double y, long double xi) {
  const long double target = std::log(xi);
  if (target <= -y) return 1.0L;
  return bisect_decreasing(
      [y](long double d) { return log_lhs_observed_lower(y, d); }, 0.0L, 1.0L,
      target);
}

// Relative residual |LHS(delta)/xi - 1| of one of the four equations.
template <typename LogLhs>
long double residual(const LogLhs& log_lhs, long double delta,
                     long double xi) {
  return std::fabs(std::expm1(log_lhs(delta) - std::log(xi)));
}

// ---------------------------------------------------------------------------
// Joint-constraint LP oracle.
//
// Minimize (or maximize) gamma . g subject to, for every nonempty subset S of
// {0,1,2}: sum_{i in S} g_i >= bound[S] (<= for the max problem), plus
// g >= 0. Solved exactly by enumerating all vertices (triples of active
// planes from the 7 subset constraints + 3 coordinate planes).

struct JointLp {
  std::array<double, 3> gamma;
  // bound[mask] for mask = 1..7 (bit i set means g_i is in the subset).
  std::array<double, 8> bound;
};

namespace detail {

inline bool solve3(const double a[3][3], const double b[3], double x[3]) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  if (std::fabs(det) < 1e-12) return false;
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  for (int col = 0; col < 3; ++col) {
    double m[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] = c == col ? b[r] : a[r][c];
    x[col] = det3(m) / det;
  }
  return true;
}

}  // namespace detail

// `minimize` selects the >=-constrained problem; otherwise <=-constrained.
inline double lp_joint_optimum(const JointLp& lp, bool minimize) {
  // Plane list: masks 1..7 are subset constraints, 8..10 are g_i = 0.
  double best = std::numeric_limits<double>::quiet_NaN();
  double scale = 1.0;
  for (int mask = 1; mask < 8; ++mask)
    scale = std::max(scale, std::fabs(lp.bound[mask]));

  for (int i = 1; i <= 10; ++i) {
    for (int j = i + 1; j <= 10; ++j) {
      for (int k = j + 1; k <= 10; ++k) {
        const int planes[3] = {i, j, k};
        double a[3][3] = {};
        double b[3] = {};
        for (int r = 0; r < 3; ++r) {
          if (planes[r] <= 7) {
            for (int c = 0; c < 3; ++c)
              a[r][c] = (planes[r] >> c) & 1 ? 1.0 : 0.0;
            b[r] = lp.bound[planes[r]];
          } else {
            a[r][planes[r] - 8] = 1.0;
            b[r] = 0.0;
          }
        }
        double g[3];
        if (!detail::solve3(a, b, g)) continue;
        const double tol = 1e-9 * scale + 1e-12;
        bool feasible = g[0] >= -tol && g[1] >= -tol && g[2] >= -tol;
        for (int m = 1; m < 8 && feasible; ++m) {
          double sum = 0.0;
          for (int c = 0; c < 3; ++c)
            if ((m >> c) & 1) sum += g[c];
          feasible = minimize ? sum >= lp.bound[m] - tol
                              : sum <= lp.bound[m] + tol;
        }
        if (!feasible) continue;
        const double value =
            lp.gamma[0] * g[0] + lp.gamma[1] * g[1] + lp.gamma[2] * g[2];
        if (std::isnan(best) || (minimize ? value < best : value > best))
          best = value;
      }
    }
  }
  return best;
}

}  // namespace oracle
