#include "channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rng.hpp"

namespace mdiqkd {

namespace {

void check_prob(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

void ChannelParams::validate() const {
  if (!(fiber_km_alice >= 0.0) || !(fiber_km_bob >= 0.0))
    throw std::invalid_argument("fiber lengths must be nonnegative");
  if (!(loss_db_per_km >= 0.0))
    throw std::invalid_argument("loss coefficient must be nonnegative");
  check_prob(detector_efficiency, "detector efficiency");
  check_prob(dark_count_prob, "dark-count probability");
  check_prob(misalignment, "misalignment probability");
  if (!(error_correction_inefficiency >= 1.0))
    throw std::invalid_argument("error-correction inefficiency must be >= 1");
}

double ObservedCounts::n(Source l, Source r) const {
  return const_cast<ObservedCounts*>(this)->n(l, r);
}

double& ObservedCounts::n(Source l, Source r) {
  if (l == Source::O && r == Source::O) return n_oo;
  if (l == Source::O && r == Source::X) return n_ox;
  if (l == Source::X && r == Source::O) return n_xo;
  if (l == Source::O && r == Source::Y) return n_oy;
  if (l == Source::Y && r == Source::O) return n_yo;
  if (l == Source::X && r == Source::X) return n_xx;
  if (l == Source::X && r == Source::Y) return n_xy;
  if (l == Source::Y && r == Source::X) return n_yx;
  if (l == Source::Y && r == Source::Y) return n_yy;
  if (l == Source::Z && r == Source::Z) return n_zz;
  throw std::domain_error(std::string("no tracked count for source pair ") +
                          source_name(l) + source_name(r));
}

void ObservedCounts::validate() const {
  for (const auto& pair : kCountPairs) {
    if (!(n(pair.l, pair.r) >= 0.0))
      throw std::invalid_argument(std::string("count n_") +
                                  source_name(pair.l) + source_name(pair.r) +
                                  " must be nonnegative");
  }
  if (!(m_xx >= 0.0) || !(m_xx <= n_xx))
    throw std::invalid_argument("wrong-event count m_xx must lie in [0, n_xx]");
  if (!(m_zz >= 0.0) || !(m_zz <= n_zz))
    throw std::invalid_argument("wrong-event count m_zz must lie in [0, n_zz]");
}

double transmittance(double fiber_km, const ChannelParams& ch) {
  if (!(fiber_km >= 0.0))
    throw std::invalid_argument("fiber length must be nonnegative");
  return ch.detector_efficiency *
         std::pow(10.0, -ch.loss_db_per_km * fiber_km / 10.0);
}

namespace {

// Which announced pattern counts as a wrong event for a given bit combo.
enum class WrongPart { None, Minus, Plus, All };

// Per-bit-combo geometry of the four detector modes. With Alice's real mode
// amplitudes t and Bob's v (after loss), the beamsplitter outputs have mean
// photon numbers base[m] +- cross[m] cos(phase difference); the misaligned
// fraction e_d of Bob's intensity arrives in the orthogonal mode as a
// non-interfering field.
struct ComboGeometry {
  double base[2];
  double cross[2];
  WrongPart wrong = WrongPart::None;
};

ComboGeometry make_combo(const double t[2], const double v[2], double e_d,
                         WrongPart wrong) {
  const double keep = 1.0 - e_d;
  const double root_keep = std::sqrt(keep);
  ComboGeometry g;
  for (int m = 0; m < 2; ++m) {
    const int o = 1 - m;
    g.base[m] = 0.5 * (t[m] * t[m] + keep * v[m] * v[m] + e_d * v[o] * v[o]);
    g.cross[m] = root_keep * t[m] * v[m];
  }
  g.wrong = wrong;
  return g;
}

std::vector<ComboGeometry> build_combos(Source l, Source r, double intensity_a,
                                        double intensity_b, double e_d) {
  std::vector<ComboGeometry> combos;
  if (l == Source::Z && r == Source::Z) {
    // Z encoding: all light in one mode; announcements imply opposite bits.
    const double root_a = std::sqrt(intensity_a);
    const double root_b = std::sqrt(intensity_b);
    for (int bit_a = 0; bit_a < 2; ++bit_a) {
      for (int bit_b = 0; bit_b < 2; ++bit_b) {
        double t[2] = {bit_a == 0 ? root_a : 0.0, bit_a == 0 ? 0.0 : root_a};
        double v[2] = {bit_b == 0 ? root_b : 0.0, bit_b == 0 ? 0.0 : root_b};
        combos.push_back(make_combo(
            t, v, e_d, bit_a == bit_b ? WrongPart::All : WrongPart::None));
      }
    }
    return combos;
  }
  // X encoding: amplitude split evenly over the modes with a bit-dependent
  // relative sign. psi+ implies equal bits, psi- opposite bits.
  const double half_a = std::sqrt(intensity_a / 2.0);
  const double half_b = std::sqrt(intensity_b / 2.0);
  const bool vac_a = intensity_a == 0.0;
  const bool vac_b = intensity_b == 0.0;
  if (vac_a && vac_b) {
    double t[2] = {0.0, 0.0};
    double v[2] = {0.0, 0.0};
    combos.push_back(make_combo(t, v, e_d, WrongPart::None));
    return combos;
  }
  for (int sign_a = 0; sign_a < (vac_a ? 1 : 2); ++sign_a) {
    for (int sign_b = 0; sign_b < (vac_b ? 1 : 2); ++sign_b) {
      double t[2] = {half_a, sign_a == 0 ? half_a : -half_a};
      double v[2] = {half_b, sign_b == 0 ? half_b : -half_b};
      WrongPart wrong = WrongPart::None;
      if (!vac_a && !vac_b)
        wrong = sign_a == sign_b ? WrongPart::Minus : WrongPart::Plus;
      combos.push_back(make_combo(t, v, e_d, wrong));
    }
  }
  return combos;
}

// Effective-event and wrong-event probabilities of one combo at a given
// phase difference. A successful event is exactly one of the four accepted
// two-detector coincidences.
void click_rates(const ComboGeometry& g, double cos_delta, double no_dark,
                 double& effective, double& wrong) {
  const double nc0 = g.base[0] + g.cross[0] * cos_delta;
  const double nd0 = g.base[0] - g.cross[0] * cos_delta;
  const double nc1 = g.base[1] + g.cross[1] * cos_delta;
  const double nd1 = g.base[1] - g.cross[1] * cos_delta;
  const double qc0 = no_dark * std::exp(-nc0);
  const double qd0 = no_dark * std::exp(-nd0);
  const double qc1 = no_dark * std::exp(-nc1);
  const double qd1 = no_dark * std::exp(-nd1);
  const double pc0 = 1.0 - qc0;
  const double pd0 = 1.0 - qd0;
  const double pc1 = 1.0 - qc1;
  const double pd1 = 1.0 - qd1;
  const double psi_plus = pc0 * pc1 * qd0 * qd1 + pd0 * pd1 * qc0 * qc1;
  const double psi_minus = pc0 * pd1 * qc1 * qd0 + pc1 * pd0 * qc0 * qd1;
  effective = psi_plus + psi_minus;
  switch (g.wrong) {
    case WrongPart::None: wrong = 0.0; break;
    case WrongPart::Minus: wrong = psi_minus; break;
    case WrongPart::Plus: wrong = psi_plus; break;
    case WrongPart::All: wrong = effective; break;
  }
}

bool phase_independent(const std::vector<ComboGeometry>& combos) {
  for (const auto& g : combos)
    if (g.cross[0] != 0.0 || g.cross[1] != 0.0) return false;
  return true;
}

// Per-window effective and wrong rates of one source pair, averaged over the
// bit combos at a fixed phase difference.
void pair_rates_at(const std::vector<ComboGeometry>& combos, double cos_delta,
                   double no_dark, double& effective, double& wrong) {
  double sum_eff = 0.0, sum_wrong = 0.0;
  for (const auto& g : combos) {
    double e = 0.0, w = 0.0;
    click_rates(g, cos_delta, no_dark, e, w);
    sum_eff += e;
    sum_wrong += w;
  }
  const double inv = 1.0 / static_cast<double>(combos.size());
  effective = sum_eff * inv;
  wrong = sum_wrong * inv;
}

}  // namespace

ObservedCounts simulate_expected_counts(const ProtocolConfig& cfg,
                                        const ChannelParams& ch,
                                        int quadrature_points) {
  cfg.validate();
  ch.validate();
  if (quadrature_points < 1)
    throw std::invalid_argument("quadrature needs at least one point");

  const double eta_a = transmittance(ch.fiber_km_alice, ch);
  const double eta_b = transmittance(ch.fiber_km_bob, ch);
  const double no_dark = 1.0 - ch.dark_count_prob;

  std::vector<double> cos_table(quadrature_points);
  for (int k = 0; k < quadrature_points; ++k)
    cos_table[k] =
        std::cos(2.0 * std::numbers::pi * k / quadrature_points);

  ObservedCounts counts;
  for (const auto& pair : kCountPairs) {
    const auto combos =
        build_combos(pair.l, pair.r, eta_a * cfg.alice.mu(pair.l),
                     eta_b * cfg.bob.mu(pair.r), ch.misalignment);
    double eff = 0.0, wrong = 0.0;
    if (phase_independent(combos)) {
      pair_rates_at(combos, 1.0, no_dark, eff, wrong);
    } else {
      for (int k = 0; k < quadrature_points; ++k) {
        double e = 0.0, w = 0.0;
        pair_rates_at(combos, cos_table[k], no_dark, e, w);
        eff += e;
        wrong += w;
      }
      eff /= quadrature_points;
      wrong /= quadrature_points;
    }
    const double windows = window_count(cfg, pair.l, pair.r);
    counts.n(pair.l, pair.r) = windows * eff;
    if (pair.l == Source::X && pair.r == Source::X) counts.m_xx = windows * wrong;
    if (pair.l == Source::Z && pair.r == Source::Z) counts.m_zz = windows * wrong;
  }
  return counts;
}

McCounts mc_oracle_counts(const ProtocolConfig& cfg, const ChannelParams& ch,
                          long samples, std::uint64_t seed, int threads) {
  cfg.validate();
  ch.validate();
  if (samples < 1) throw std::invalid_argument("need at least one MC sample");
  if (threads < 1) threads = 1;

  const double eta_a = transmittance(ch.fiber_km_alice, ch);
  const double eta_b = transmittance(ch.fiber_km_bob, ch);
  const double no_dark = 1.0 - ch.dark_count_prob;

  constexpr int kQuantities = 12;  // 10 effective counts + m_xx + m_zz
  std::vector<std::vector<ComboGeometry>> combos;
  combos.reserve(10);
  for (const auto& pair : kCountPairs)
    combos.push_back(build_combos(pair.l, pair.r,
                                  eta_a * cfg.alice.mu(pair.l),
                                  eta_b * cfg.bob.mu(pair.r),
                                  ch.misalignment));

  struct Slab {
    double sum[kQuantities] = {0.0};
    double sumsq[kQuantities] = {0.0};
  };
  std::vector<Slab> slabs(threads);

  auto worker = [&](int w, long begin, long end) {
    Slab& slab = slabs[w];
    for (long i = begin; i < end; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      const double phase_a = 2.0 * std::numbers::pi * rng.next_double();
      const double phase_b = 2.0 * std::numbers::pi * rng.next_double();
      const double cos_delta = std::cos(phase_a - phase_b);
      for (int p = 0; p < 10; ++p) {
        double eff = 0.0, wrong = 0.0;
        pair_rates_at(combos[p], cos_delta, no_dark, eff, wrong);
        slab.sum[p] += eff;
        slab.sumsq[p] += eff * eff;
        if (kCountPairs[p].l == Source::X && kCountPairs[p].r == Source::X) {
          slab.sum[10] += wrong;
          slab.sumsq[10] += wrong * wrong;
        } else if (kCountPairs[p].l == Source::Z &&
                   kCountPairs[p].r == Source::Z) {
          slab.sum[11] += wrong;
          slab.sumsq[11] += wrong * wrong;
        }
      }
    }
  };

  if (threads == 1) {
    worker(0, 0, samples);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (samples + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const long begin = w * chunk;
      const long end = std::min(samples, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, w, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  double sum[kQuantities] = {0.0};
  double sumsq[kQuantities] = {0.0};
  for (const auto& slab : slabs) {
    for (int q = 0; q < kQuantities; ++q) {
      sum[q] += slab.sum[q];
      sumsq[q] += slab.sumsq[q];
    }
  }

  McCounts out;
  const double n = static_cast<double>(samples);
  for (int q = 0; q < kQuantities; ++q) {
    const double mean = sum[q] / n;
    double var = 0.0;
    if (samples > 1) {
      var = (sumsq[q] - n * mean * mean) / (n - 1.0);
      if (var < 0.0) var = 0.0;  // rounding guard
    }
    const double se = std::sqrt(var / n);
    double scale = 1.0;
    double* mean_field = nullptr;
    double* se_field = nullptr;
    if (q < 10) {
      const auto& pair = kCountPairs[q];
      scale = window_count(cfg, pair.l, pair.r);
      mean_field = &out.mean.n(pair.l, pair.r);
      se_field = &out.std_error.n(pair.l, pair.r);
    } else if (q == 10) {
      scale = window_count(cfg, Source::X, Source::X);
      mean_field = &out.mean.m_xx;
      se_field = &out.std_error.m_xx;
    } else {
      scale = window_count(cfg, Source::Z, Source::Z);
      mean_field = &out.mean.m_zz;
      se_field = &out.std_error.m_zz;
    }
    *mean_field = scale * mean;
    *se_field = scale * se;
  }
  return out;
}

ObservedCounts sample_observed_counts(const ObservedCounts& expected,
                                      std::uint64_t seed) {
  expected.validate();
  std::mt19937_64 gen(seed);
  auto draw = [&gen](double mean) -> double {
    if (mean <= 0.0) return 0.0;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(gen));
  };
  ObservedCounts out;
  for (const auto& pair : kCountPairs) {
    const bool is_xx = pair.l == Source::X && pair.r == Source::X;
    const bool is_zz = pair.l == Source::Z && pair.r == Source::Z;
    if (is_xx || is_zz) {
      // Sample right and wrong events separately so m <= n by construction.
      const double m_mean = is_xx ? expected.m_xx : expected.m_zz;
      const double right = draw(expected.n(pair.l, pair.r) - m_mean);
      const double wrong = draw(m_mean);
      out.n(pair.l, pair.r) = right + wrong;
      (is_xx ? out.m_xx : out.m_zz) = wrong;
    } else {
      out.n(pair.l, pair.r) = draw(expected.n(pair.l, pair.r));
    }
  }
  return out;
}

}  // namespace mdiqkd
