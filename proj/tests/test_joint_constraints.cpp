#include "joint_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "chernoff.hpp"
#include "oracles.hpp"

using namespace mdiqkd;

namespace {

double log_uniform(std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(gen));
}

JointInstance random_instance(std::mt19937_64& gen) {
  JointInstance inst;
  for (int i = 0; i < 3; ++i) {
    inst.gamma[i] = log_uniform(gen, 1e-8, 1e2);
    inst.gs[i] = log_uniform(gen, 1.0, 1e10);
    inst.xi[i] = log_uniform(gen, 1e-15, 0.5);
  }
  return inst;
}

// LP right-hand sides for the oracle: subset sums of the observed values fed
// through the matching-rank Chernoff bound.
oracle::JointLp make_lp(const JointInstance& inst, bool lower) {
  oracle::JointLp lp;
  lp.gamma = inst.gamma;
  for (int mask = 1; mask < 8; ++mask) {
    double sum = 0.0;
    int terms = 0;
    for (int i = 0; i < 3; ++i) {
      if ((mask >> i) & 1) {
        sum += inst.gs[i];
        ++terms;
      }
    }
    const FailureProb xi(inst.xi[terms - 1]);
    lp.bound[mask] = lower ? expected_lower(sum, xi) : expected_upper(sum, xi);
  }
  return lp;
}

// Whether the vertex implied by the telescoped closed form is feasible for
// the full 7-constraint system; equality with the LP optimum is guaranteed
// exactly on these instances.
bool formula_vertex_feasible(const JointInstance& inst, bool lower) {
  const oracle::JointLp lp = make_lp(inst, lower);
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.gamma[a] < inst.gamma[b];
  });
  // Suffix masks in ascending-gamma order.
  double g[3];
  double prev = 0.0;
  for (int i = 2; i >= 0; --i) {
    int mask = 0;
    for (int j = i; j < 3; ++j) mask |= 1 << order[j];
    const double bound = lp.bound[mask];
    g[order[i]] = bound - prev;
    prev = bound;
  }
  double scale = 1.0;
  for (int m = 1; m < 8; ++m) scale = std::max(scale, std::fabs(lp.bound[m]));
  const double tol = 1e-9 * scale;
  for (int i = 0; i < 3; ++i)
    if (g[i] < -tol) return false;
  for (int m = 1; m < 8; ++m) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i)
      if ((m >> i) & 1) sum += g[i];
    if (lower ? sum < lp.bound[m] - tol : sum > lp.bound[m] + tol)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("tied coefficients collapse to one bound") {
  JointInstance inst;
  inst.gamma = {2.5, 2.5, 2.5};
  inst.gs = {100.0, 200.0, 300.0};
  inst.xi = {0.1, 0.01, 0.001};
  CHECK(joint_lower(inst) ==
        2.5 * expected_lower(600.0, FailureProb(0.001)));
  CHECK(joint_upper(inst) ==
        2.5 * expected_upper(600.0, FailureProb(0.001)));
}

TEST_CASE("zero-coefficient slots are absent") {
  JointInstance inst;
  inst.gamma = {0.0, 0.0, 3.0};
  inst.gs = {123.0, 456.0, 789.0};
  // Inactive xi ranks may hold invalid values (the degenerate calls pass 0).
  inst.xi = {0.05, 0.0, 0.0};
  CHECK(joint_lower(inst) == 3.0 * expected_lower(789.0, FailureProb(0.05)));
  CHECK(joint_upper(inst) == 3.0 * expected_upper(789.0, FailureProb(0.05)));

  // Two active slots use the single- and pair-rank failure probabilities.
  inst.gamma = {1.0, 0.0, 3.0};
  inst.xi = {0.05, 0.01, 0.0};
  const double expected = 1.0 * expected_lower(123.0 + 789.0, FailureProb(0.01)) +
                          2.0 * expected_lower(789.0, FailureProb(0.05));
  CHECK(joint_lower(inst) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("permutation invariance is exact") {
  std::mt19937_64 gen(3);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int trial = 0; trial < 50; ++trial) {
    const JointInstance inst = random_instance(gen);
    const double lower = joint_lower(inst);
    const double upper = joint_upper(inst);
    for (const auto& p : perms) {
      JointInstance permuted;
      for (int i = 0; i < 3; ++i) {
        permuted.gamma[i] = inst.gamma[p[i]];
        permuted.gs[i] = inst.gs[p[i]];
      }
      permuted.xi = inst.xi;  // ranks stay with the sort, not the pairs
      CHECK(joint_lower(permuted) == lower);
      CHECK(joint_upper(permuted) == upper);
    }
  }
}

TEST_CASE("ties in gamma cannot affect the value") {
  JointInstance inst;
  inst.gamma = {1.5, 1.5, 0.3};
  inst.gs = {10.0, 20.0, 30.0};
  inst.xi = {0.1, 0.01, 0.001};
  JointInstance swapped = inst;
  std::swap(swapped.gs[0], swapped.gs[1]);
  CHECK(joint_lower(inst) == joint_lower(swapped));
  CHECK(joint_upper(inst) == joint_upper(swapped));
}

TEST_CASE("joint bounds against the LP vertex oracle") {
  std::mt19937_64 gen(17);
  int generic_lower = 0, generic_upper = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const JointInstance inst = random_instance(gen);
    const double lower = joint_lower(inst);
    const double upper = joint_upper(inst);
    CHECK(lower <= upper);

    const double lp_min = oracle::lp_joint_optimum(make_lp(inst, true), true);
    const double lp_max = oracle::lp_joint_optimum(make_lp(inst, false), false);
    const double scale_min = std::max({1.0, std::fabs(lower), std::fabs(lp_min)});
    const double scale_max = std::max({1.0, std::fabs(upper), std::fabs(lp_max)});
    // One-sided safety always holds.
    CHECK(lower <= lp_min + 1e-9 * scale_min);
    CHECK(upper >= lp_max - 1e-9 * scale_max);
    // Equality whenever the closed form's implied vertex is feasible.
    if (formula_vertex_feasible(inst, true)) {
      ++generic_lower;
      CHECK(lower == doctest::Approx(lp_min).epsilon(1e-9));
    }
    if (formula_vertex_feasible(inst, false)) {
      ++generic_upper;
      CHECK(upper == doctest::Approx(lp_max).epsilon(1e-9));
    }
  }
  // Log the equality frequency; the paper warns extreme cases exist.
  MESSAGE("generic instances: lower " << generic_lower << "/" << trials
                                      << ", upper " << generic_upper << "/"
                                      << trials);
  CHECK(generic_lower > 0);
  CHECK(generic_upper > 0);
}

TEST_CASE("tighter than the naive per-term bound") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    JointInstance inst = random_instance(gen);
    const double xi = inst.xi[0];
    inst.xi = {xi, xi, xi};
    double naive_lower = 0.0, naive_upper = 0.0;
    for (int i = 0; i < 3; ++i) {
      naive_lower += inst.gamma[i] * expected_lower(inst.gs[i], FailureProb(xi));
      naive_upper += inst.gamma[i] * expected_upper(inst.gs[i], FailureProb(xi));
    }
    CHECK(joint_lower(inst) >= naive_lower * (1.0 - 1e-12));
    CHECK(joint_upper(inst) <= naive_upper * (1.0 + 1e-12));
  }
}

TEST_CASE("input validation") {
  JointInstance inst;
  inst.gamma = {-1.0, 1.0, 1.0};
  inst.gs = {1.0, 1.0, 1.0};
  inst.xi = {0.1, 0.1, 0.1};
  CHECK_THROWS_AS(joint_lower(inst), std::domain_error);
  inst.gamma = {1.0, 1.0, 1.0};
  inst.gs = {-1.0, 1.0, 1.0};
  CHECK_THROWS_AS(joint_upper(inst), std::domain_error);
}
