#include "keyrate.hpp"

#include <cmath>
#include <stdexcept>

namespace mdiqkd {

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("entropy argument must lie in [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double key_rate(double s11z_l, double e11ph_u, const ObservedCounts& counts,
                const ProtocolConfig& cfg, const FailureBudget& budget,
                double error_correction_inefficiency) {
  const double n_zz_windows = window_count(cfg, Source::Z, Source::Z);
  if (!(counts.n_zz > 0.0)) return 0.0;  // no signal events, no key
  const double s_zz = counts.n_zz / n_zz_windows;
  const double e_zz = counts.m_zz / counts.n_zz;
  const double a1z = poisson_weight(cfg.alice.mu_z, 1);
  const double b1z = poisson_weight(cfg.bob.mu_z, 1);
  const double brace =
      a1z * b1z * s11z_l * (1.0 - binary_entropy(e11ph_u)) -
      error_correction_inefficiency * s_zz * binary_entropy(e_zz);
  const double correction =
      (std::log2(8.0 / budget.eps_cor) +
       2.0 * std::log2(2.0 / (budget.eps_prime * budget.eps_hat)) +
       2.0 * std::log2(1.0 / (2.0 * budget.eps_pa))) /
      cfg.pulse_pairs;
  return cfg.alice.p_z * cfg.bob.p_z * brace - correction;
}

double epsilon_total(const FailureBudget& budget, ScanMode mode) {
  const double eps =
      budget.eps_cor +
      2.0 * (budget.eps_prime + budget.eps_hat +
             2.0 * std::sqrt(budget.epsilon_e() + budget.epsilon_1(mode))) +
      budget.eps_pa;
  if (!(eps < 1.0))
    throw std::invalid_argument("total secure coefficient reaches 1");
  return eps;
}

double solve_eps_pa(const FailureBudget& budget, double target,
                    ScanMode mode) {
  // eps_pa enters linearly, so the solve is exact.
  const double rest =
      budget.eps_cor +
      2.0 * (budget.eps_prime + budget.eps_hat +
             2.0 * std::sqrt(budget.epsilon_e() + budget.epsilon_1(mode)));
  const double eps_pa = target - rest;
  if (!(eps_pa > 0.0))
    throw std::invalid_argument(
        "failure budget already exceeds the total secure coefficient");
  return eps_pa;
}

KeyRateReport compose_report(const DecoyEstimate& estimate,
                             const ObservedCounts& counts,
                             const ProtocolConfig& cfg,
                             const FailureBudget& budget, ScanMode mode) {
  KeyRateReport report;
  report.s11z_lower = estimate.s11z_lower;
  report.e11ph_upper = estimate.e11ph_upper;
  report.worst_h = estimate.worst_h;
  report.worst_m = estimate.worst_m;
  report.mode = mode;
  report.budget = budget;
  report.scan_margin = estimate.grid_margin;
  report.eps_total = epsilon_total(budget, mode);
  const double n_zz_windows = window_count(cfg, Source::Z, Source::Z);
  report.s_zz = counts.n_zz / n_zz_windows;
  report.e_zz = counts.n_zz > 0.0 ? counts.m_zz / counts.n_zz : 0.0;
  if (!(counts.n_zz > 0.0)) {
    report.no_key = true;
    report.no_key_reason = "no-signal-events";
    return report;
  }
  if (estimate.scanned_rate > 0.0) {
    report.rate_per_pulse = estimate.scanned_rate;
  } else {
    report.no_key = true;
    report.no_key_reason = "rate-nonpositive";
  }
  return report;
}

}  // namespace mdiqkd
