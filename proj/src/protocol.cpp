#include "protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace mdiqkd {

const char* source_name(Source s) {
  switch (s) {
    case Source::O: return "o";
    case Source::X: return "x";
    case Source::Y: return "y";
    case Source::Z: return "z";
  }
  throw std::domain_error("unknown source label");
}

double SourceSide::mu(Source s) const {
  switch (s) {
    case Source::O: return 0.0;
    case Source::X: return mu_x;
    case Source::Y: return mu_y;
    case Source::Z: return mu_z;
  }
  throw std::domain_error("unknown source label");
}

double SourceSide::prob(Source s) const {
  switch (s) {
    case Source::O: return p_o();
    case Source::X: return p_x;
    case Source::Y: return p_y;
    case Source::Z: return p_z;
  }
  throw std::domain_error("unknown source label");
}

void SourceSide::validate() const {
  if (!(mu_x > 0.0) || !(mu_x <= mu_y))
    throw std::invalid_argument("intensities must satisfy 0 < mu_x <= mu_y");
  if (!(mu_z > 0.0)) throw std::invalid_argument("mu_z must be positive");
  if (!(p_x > 0.0 && p_y > 0.0 && p_z > 0.0))
    throw std::invalid_argument("sending probabilities must be positive");
  if (!(p_x + p_y + p_z < 1.0))
    throw std::invalid_argument(
        "sending probabilities must leave room for the vacuum source");
}

void ProtocolConfig::validate() const {
  alice.validate();
  bob.validate();
  if (!(pulse_pairs >= 1.0))
    throw std::invalid_argument("pulse-pair count N must be at least 1");
}

double poisson_weight(double mu, int k) {
  if (!(mu >= 0.0)) throw std::domain_error("intensity must be nonnegative");
  if (k < 0) throw std::domain_error("photon number must be nonnegative");
  if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
  // mu^k e^{-mu} / k! in log space to avoid overflow for large k.
  return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
}

double window_count(const ProtocolConfig& cfg, Source l, Source r) {
  return cfg.alice.prob(l) * cfg.bob.prob(r) * cfg.pulse_pairs;
}

ScanBranch branch_select(const ProtocolConfig& cfg) {
  const double bob_ratio = cfg.bob.mu_y / cfg.bob.mu_x;
  const double alice_ratio = cfg.alice.mu_y / cfg.alice.mu_x;
  return bob_ratio <= alice_ratio ? ScanBranch::BobRatioSmaller
                                  : ScanBranch::AliceRatioSmaller;
}

}  // namespace mdiqkd
