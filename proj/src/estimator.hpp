#pragma once

#include <utility>

#include "channel.hpp"
#include "protocol.hpp"

namespace mdiqkd {

enum class ScanMode { Single, Double };

const char* scan_mode_name(ScanMode mode);

// Failure probabilities of every Chernoff estimate in the pipeline plus the
// security-composition coefficients. The privacy-amplification failure
// eps_pa is normally derived from a fixed total secure coefficient.
struct FailureBudget {
  double xi_s1p = 0.0, xi_s2p = 0.0, xi_s3p = 0.0;  // S+ joint bound
  double xi_s1m = 0.0, xi_s2m = 0.0;                // S- joint bound
  double xi_h1l = 0.0, xi_h2l = 0.0, xi_h3l = 0.0;  // H lower bound
  double xi_h1u = 0.0, xi_h2u = 0.0, xi_h3u = 0.0;  // H upper bound
  double xi_ml = 0.0, xi_mu = 0.0;                  // M interval
  double xi_s11 = 0.0;                              // expected -> observed, yield
  double xi_e11 = 0.0;                              // expected -> observed, error
  double eps_cor = 0.0;
  double eps_prime = 0.0;
  double eps_hat = 0.0;
  double eps_pa = 0.0;

  // Failure probability of the single-photon-yield estimate. The
  // double-scanning pipeline uses all 14 xi's; the single-scanning pipeline
  // never evaluates xi_ml and keeps the rest (xi_mu backs the fixed
  // <m_xx>^U estimate).
  double epsilon_1(ScanMode mode) const;
  double epsilon_e() const { return xi_e11; }

  // Equal-share allocation: eps_cor, eps_pa and the two chain-rule terms
  // each receive a fifth of the target, the remaining fifth goes to
  // 4*sqrt(eps_e + eps_1) and is split uniformly over the active xi's.
  static FailureBudget uniform(double eps_total_target, ScanMode mode);

  void validate(ScanMode mode) const;  // active entries in (0,1)
};

// Discretization of the worst-case scan over the confidence rectangle.
struct ScanSettings {
  int grid_h = 101;
  int grid_m = 101;
  int refine_rounds = 2;  // 5x zooms around the incumbent minimum
};

// Result of a worst-case scan: the bounds at the minimizing grid point, the
// minimizer itself, and the minimized key rate. `scanned_rate` already has
// the grid-continuity margin subtracted and may be negative (no key).
struct DecoyEstimate {
  double s11z_lower = 0.0;
  double e11ph_upper = 0.0;
  double worst_h = 0.0;
  double worst_m = 0.0;
  double scanned_rate = 0.0;
  double grid_margin = 0.0;
};

// Lower bound of <S+>* (the m-bar_xx / n_oy / n_yo combination) through the
// joint-constraint bound, with branch-dependent photon-number coefficients.
double s_plus_star_lower(const ObservedCounts& counts,
                         const ProtocolConfig& cfg,
                         const FailureBudget& budget);

// Upper bound of <S-> (n_yy and n_oo terms).
double s_minus_upper(const ObservedCounts& counts, const ProtocolConfig& cfg,
                     const FailureBudget& budget);

// Confidence bounds of the vacuum-related count combination H. The lower
// bound is clamped at 0.
std::pair<double, double> h_bounds(const ObservedCounts& counts,
                                   const ProtocolConfig& cfg,
                                   const FailureBudget& budget);

// Confidence bounds of the expected wrong-event count M of source xx.
std::pair<double, double> m_bounds(const ObservedCounts& counts,
                                   const FailureBudget& budget);

// H- and M-independent parts of the yield bound numerator.
struct JointParts {
  double s_plus_lower = 0.0;
  double s_minus_upper = 0.0;
};

// Lower bound of the single-photon-pair yield in the X windows at a given
// scan point, clamped to [0,1]. Throws for degenerate configurations whose
// branch denominator vanishes (mu_x == mu_y on the relevant side).
double s11x_lower(double h, double m, const JointParts& parts,
                  const ProtocolConfig& cfg);

// Upper bound of the single-photon bit-flip error rate in the X windows,
// clamped to [0, 1/2]. Requires s11x_l > 0.
double e11bit_upper(double h, double m, double s11x_l,
                    const ProtocolConfig& cfg);

// Worst-case yield of single-photon pairs in the signal windows.
double s11z_lower(double s11x_l, const ProtocolConfig& cfg,
                  const FailureBudget& budget);

// Worst-case phase-flip error rate of the signal-window single photons,
// clamped to <= 1/2.
double e11ph_upper(double s11z_l, double e11bit_u, const ProtocolConfig& cfg,
                   const FailureBudget& budget);

// Prior-art pipeline: the S+ bound uses n_xx and the error bound uses the
// fixed upper estimate of m_xx; the key rate is minimized over H alone.
DecoyEstimate single_scan(const ObservedCounts& counts,
                          const ProtocolConfig& cfg,
                          const FailureBudget& budget,
                          const ScanSettings& scan,
                          double error_correction_inefficiency);

// Joint worst case over the (H, M) rectangle.
DecoyEstimate double_scan(const ObservedCounts& counts,
                          const ProtocolConfig& cfg,
                          const FailureBudget& budget,
                          const ScanSettings& scan,
                          double error_correction_inefficiency);

}  // namespace mdiqkd
