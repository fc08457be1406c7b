#pragma once

#include <array>

namespace mdiqkd {

// One instance of the three-term joint-constraint problem: bound
// F = gamma_1 g_1 + gamma_2 g_2 + gamma_3 g_3 where each g_i is an unknown
// expectation constrained through Chernoff bounds on the observed sums
// gs_i and on their pairwise/triple sums.
//
// xi[0] applies to single-term constraints, xi[1] to pair sums, xi[2] to the
// triple sum. Slots with gamma == 0 are absent: their gs and the unused xi
// ranks are never evaluated, so degenerate calls may pass 0 there.
struct JointInstance {
  std::array<double, 3> gamma;  // coefficients, >= 0
  std::array<double, 3> gs;     // observed sums, >= 0
  std::array<double, 3> xi;     // failure probabilities by rank
};

// Closed-form optimum of the joint-constraint linear program: sort the
// active (gamma, gs) pairs by ascending gamma and telescope suffix sums,
// charging the k-term sum to xi[k-1].
double joint_lower(const JointInstance& inst);
double joint_upper(const JointInstance& inst);

}  // namespace mdiqkd
