#pragma once

namespace mdiqkd {

// Pulse sources of the 4-intensity protocol. o is vacuum, x and y are the
// X-basis decoy intensities (mu_x <= mu_y), z is the Z-basis signal.
enum class Source { O, X, Y, Z };

inline constexpr Source kAllSources[4] = {Source::O, Source::X, Source::Y,
                                          Source::Z};

const char* source_name(Source s);

// One party's source parameters: intensities and sending probabilities.
// The vacuum source has mu = 0 and probability 1 - p_x - p_y - p_z.
struct SourceSide {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double mu_z = 0.0;
  double p_x = 0.0;
  double p_y = 0.0;
  double p_z = 0.0;

  double p_o() const { return 1.0 - p_x - p_y - p_z; }
  double mu(Source s) const;
  double prob(Source s) const;
  void validate() const;  // throws std::invalid_argument
};

struct ProtocolConfig {
  SourceSide alice;
  SourceSide bob;
  double pulse_pairs = 0.0;  // N, kept real-valued

  void validate() const;
};

// Poisson photon-number weight mu^k e^{-mu} / k! of a phase-randomized
// coherent source.
double poisson_weight(double mu, int k);

// Number of pulse pairs in which Alice used source l and Bob used source r:
// p_{l_A} p_{r_B} N, real-valued.
double window_count(const ProtocolConfig& cfg, Source l, Source r);

// Which analytic form of the single-photon-pair yield bound applies. The two
// forms coincide when the decoy intensity ratios are equal; the tie is
// resolved to BobRatioSmaller.
enum class ScanBranch { BobRatioSmaller, AliceRatioSmaller };

ScanBranch branch_select(const ProtocolConfig& cfg);

}  // namespace mdiqkd
