#pragma once

#include <string>

#include "estimator.hpp"

namespace mdiqkd {

// Shannon binary entropy, h(0) = h(1) = 0.
double binary_entropy(double x);

// Finite-key secret-key rate per pulse pair for given worst-case bounds:
//   p_zA p_zB { a1z b1z s11z [1 - h(e11ph)] - f S_zz h(E_zz) }
//   - (1/N) ( log2(8/eps_cor) + 2 log2(2/(eps' eps_hat)) + 2 log2(1/(2 eps_pa)) )
// Not clamped: callers minimize this over the scan rectangle first.
double key_rate(double s11z_l, double e11ph_u, const ObservedCounts& counts,
                const ProtocolConfig& cfg, const FailureBudget& budget,
                double error_correction_inefficiency);

// Total secure coefficient
//   eps_cor + 2 (eps' + eps_hat + 2 sqrt(eps_e + eps_1)) + eps_pa
// with eps_1 per scan mode. Throws if the result reaches 1.
double epsilon_total(const FailureBudget& budget, ScanMode mode);

// The unique eps_pa that makes epsilon_total hit `target` given the other
// budget entries; throws if they already exceed the target.
double solve_eps_pa(const FailureBudget& budget, double target, ScanMode mode);

struct KeyRateReport {
  double rate_per_pulse = 0.0;  // clamped at 0
  double s11z_lower = 0.0;
  double e11ph_upper = 0.0;
  double worst_h = 0.0;
  double worst_m = 0.0;
  double eps_total = 0.0;
  ScanMode mode = ScanMode::Double;
  double s_zz = 0.0;  // n_zz / N_zz
  double e_zz = 0.0;  // m_zz / n_zz
  double scan_margin = 0.0;
  FailureBudget budget;
  bool no_key = false;
  std::string no_key_reason;
};

KeyRateReport compose_report(const DecoyEstimate& estimate,
                             const ObservedCounts& counts,
                             const ProtocolConfig& cfg,
                             const FailureBudget& budget, ScanMode mode);

}  // namespace mdiqkd
