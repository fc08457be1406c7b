#include "joint_constraints.hpp"

#include <algorithm>
#include <stdexcept>

#include "chernoff.hpp"

namespace mdiqkd {

namespace {

template <typename Bound>
double joint_bound(const JointInstance& inst, const Bound& bound) {
  std::array<int, 3> order{};
  int active = 0;
  for (int i = 0; i < 3; ++i) {
    if (!(inst.gamma[i] >= 0.0))
      throw std::domain_error("joint-constraint coefficients must be nonnegative");
    if (inst.gamma[i] == 0.0) continue;
    if (!(inst.gs[i] >= 0.0))
      throw std::domain_error("joint-constraint observed sums must be nonnegative");
    order[active++] = i;
  }
  if (active == 0) return 0.0;
  // Stable ascending sort: ties keep original index order. Tied coefficients
  // get a zero telescoped weight, so the tie order cannot change the value.
  std::stable_sort(order.begin(), order.begin() + active,
                   [&](int a, int b) { return inst.gamma[a] < inst.gamma[b]; });

  double value = 0.0;
  double prev_gamma = 0.0;
  for (int i = 0; i < active; ++i) {
    double suffix = 0.0;
    for (int j = i; j < active; ++j) suffix += inst.gs[order[j]];
    const int terms = active - i;
    value += (inst.gamma[order[i]] - prev_gamma) *
             bound(suffix, FailureProb(inst.xi[terms - 1]));
    prev_gamma = inst.gamma[order[i]];
  }
  return value;
}

}  // namespace

double joint_lower(const JointInstance& inst) {
  return joint_bound(inst, [](double x, FailureProb xi) {
    return expected_lower(x, xi);
  });
}

double joint_upper(const JointInstance& inst) {
  return joint_bound(inst, [](double x, FailureProb xi) {
    return expected_upper(x, xi);
  });
}

}  // namespace mdiqkd
