#pragma once

#include <cstdint>

#include "protocol.hpp"

namespace mdiqkd {

// Fiber and detection-station parameters.
struct ChannelParams {
  double fiber_km_alice = 0.0;  // Alice -> Charlie
  double fiber_km_bob = 0.0;    // Bob -> Charlie
  double loss_db_per_km = 0.2;
  double detector_efficiency = 1.0;
  double dark_count_prob = 0.0;  // per detector per window
  double misalignment = 0.0;     // lone-photon wrong-mode probability
  double error_correction_inefficiency = 1.0;

  void validate() const;  // throws std::invalid_argument
};

// Effective-event counts per two-pulse source, plus the wrong-event counts
// of the xx and zz sources. Real-valued: the default pipeline works with
// expectations, not sampled integers.
struct ObservedCounts {
  double n_oo = 0.0, n_ox = 0.0, n_xo = 0.0, n_oy = 0.0, n_yo = 0.0;
  double n_xx = 0.0, n_xy = 0.0, n_yx = 0.0, n_yy = 0.0, n_zz = 0.0;
  double m_xx = 0.0;
  double m_zz = 0.0;

  double n(Source l, Source r) const;
  double& n(Source l, Source r);
  void validate() const;  // nonnegative, m_xx <= n_xx, m_zz <= n_zz
};

// Pairs tracked in ObservedCounts, in canonical order.
inline constexpr struct { Source l, r; } kCountPairs[10] = {
    {Source::O, Source::O}, {Source::O, Source::X}, {Source::X, Source::O},
    {Source::O, Source::Y}, {Source::Y, Source::O}, {Source::X, Source::X},
    {Source::X, Source::Y}, {Source::Y, Source::X}, {Source::Y, Source::Y},
    {Source::Z, Source::Z}};

// One-way transmittance of a fiber span with the detector efficiency folded
// in: eta_d * 10^(-alpha L / 10).
double transmittance(double fiber_km, const ChannelParams& ch);

// Deterministic expected counts from the linear optical model: both parties
// send phase-randomized coherent pulses over two orthogonal modes, Charlie
// interferes them on a 50:50 beamsplitter followed by mode-separating
// splitters onto four threshold detectors, and announces one of the two
// Bell-type coincidence patterns. Misalignment routes a fraction e_d of each
// of Bob's mode intensities into the orthogonal mode as a non-interfering
// field. Conditional on the global phases every detector's mean photon
// number is a closed-form quadratic in the mode amplitudes and depends on
// the phases only through their difference; the phase average is a
// `quadrature_points`-point periodic trapezoid rule.
ObservedCounts simulate_expected_counts(const ProtocolConfig& cfg,
                                        const ChannelParams& ch,
                                        int quadrature_points = 512);

// Monte-Carlo estimate of the same expectations: sample the two global
// phases uniformly and average the exact per-phase click probabilities.
// Deterministic for a fixed seed; sample streams are counter-based, so the
// estimate is independent of how samples are partitioned over threads.
struct McCounts {
  ObservedCounts mean;
  ObservedCounts std_error;
};

McCounts mc_oracle_counts(const ProtocolConfig& cfg, const ChannelParams& ch,
                          long samples, std::uint64_t seed, int threads = 1);

// Optional statistical-fluctuation study: Poisson-sample integer counts
// around the expectations. Wrong counts are sampled jointly with the right
// counts so m <= n always holds. The default pipeline does not use this.
ObservedCounts sample_observed_counts(const ObservedCounts& expected,
                                      std::uint64_t seed);

}  // namespace mdiqkd
