#include "estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "chernoff.hpp"
#include "joint_constraints.hpp"
#include "keyrate.hpp"

namespace mdiqkd {

const char* scan_mode_name(ScanMode mode) {
  return mode == ScanMode::Single ? "single" : "double";
}

double FailureBudget::epsilon_1(ScanMode mode) const {
  double sum = xi_s1p + xi_s2p + xi_s3p + xi_s1m + xi_s2m + xi_h1l + xi_h2l +
               xi_h3l + xi_h1u + xi_h2u + xi_h3u + xi_mu + xi_s11;
  if (mode == ScanMode::Double) sum += xi_ml;
  return sum;
}

FailureBudget FailureBudget::uniform(double eps_total_target, ScanMode mode) {
  if (!(eps_total_target > 0.0 && eps_total_target < 1.0))
    throw std::invalid_argument("total secure coefficient must lie in (0,1)");
  FailureBudget b;
  const double share = eps_total_target / 5.0;
  b.eps_cor = share;
  b.eps_pa = share;
  b.eps_prime = eps_total_target / 10.0;
  b.eps_hat = eps_total_target / 10.0;
  const double sqrt_arg = (eps_total_target / 20.0) * (eps_total_target / 20.0);
  const int active = mode == ScanMode::Double ? 15 : 14;
  const double xi = sqrt_arg / active;
  b.xi_s1p = b.xi_s2p = b.xi_s3p = xi;
  b.xi_s1m = b.xi_s2m = xi;
  b.xi_h1l = b.xi_h2l = b.xi_h3l = xi;
  b.xi_h1u = b.xi_h2u = b.xi_h3u = xi;
  b.xi_ml = b.xi_mu = xi;
  b.xi_s11 = xi;
  b.xi_e11 = xi;
  return b;
}

void FailureBudget::validate(ScanMode mode) const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0))
      throw std::invalid_argument(std::string("failure budget entry ") + name +
                                  " must lie in (0,1)");
  };
  check(xi_s1p, "xi_s1p");
  check(xi_s2p, "xi_s2p");
  check(xi_s3p, "xi_s3p");
  check(xi_s1m, "xi_s1m");
  check(xi_s2m, "xi_s2m");
  check(xi_h1l, "xi_h1l");
  check(xi_h2l, "xi_h2l");
  check(xi_h3l, "xi_h3l");
  check(xi_h1u, "xi_h1u");
  check(xi_h2u, "xi_h2u");
  check(xi_h3u, "xi_h3u");
  if (mode == ScanMode::Double) check(xi_ml, "xi_ml");
  check(xi_mu, "xi_mu");
  check(xi_s11, "xi_s11");
  check(xi_e11, "xi_e11");
  check(eps_cor, "eps_cor");
  check(eps_prime, "eps_prime");
  check(eps_hat, "eps_hat");
  check(eps_pa, "eps_pa");
}

namespace {

// Photon-number weights and window counts feeding the analytic bounds; the
// branch decides whether the (a1 b2) or the (a2 b1) combination carries the
// yield information.
struct Coefficients {
  std::array<double, 3> gamma_sp;  // S+ coefficients (xx, oy, yo terms)
  std::array<double, 2> gamma_sm;  // S- coefficients (yy, oo terms)
  double coeff_h = 0.0;            // H weight in the yield numerator
  double denom = 0.0;              // branch denominator
  double n_xx = 0.0, n_oy = 0.0, n_yo = 0.0, n_yy = 0.0, n_oo = 0.0;
  double n_ox = 0.0, n_xo = 0.0, n_zz = 0.0;
  double a0x = 0.0, b0x = 0.0, a1x = 0.0, b1x = 0.0;
  double zz_scale = 0.0;  // N_zz a1z b1z
};

Coefficients compute_coefficients(const ProtocolConfig& cfg) {
  cfg.validate();
  const SourceSide& a = cfg.alice;
  const SourceSide& b = cfg.bob;
  const double a0x = poisson_weight(a.mu_x, 0);
  const double a1x = poisson_weight(a.mu_x, 1);
  const double a2x = poisson_weight(a.mu_x, 2);
  const double a0y = poisson_weight(a.mu_y, 0);
  const double a1y = poisson_weight(a.mu_y, 1);
  const double a2y = poisson_weight(a.mu_y, 2);
  const double b0x = poisson_weight(b.mu_x, 0);
  const double b1x = poisson_weight(b.mu_x, 1);
  const double b2x = poisson_weight(b.mu_x, 2);
  const double b0y = poisson_weight(b.mu_y, 0);
  const double b1y = poisson_weight(b.mu_y, 1);
  const double b2y = poisson_weight(b.mu_y, 2);

  Coefficients c;
  c.n_xx = window_count(cfg, Source::X, Source::X);
  c.n_oy = window_count(cfg, Source::O, Source::Y);
  c.n_yo = window_count(cfg, Source::Y, Source::O);
  c.n_yy = window_count(cfg, Source::Y, Source::Y);
  c.n_oo = window_count(cfg, Source::O, Source::O);
  c.n_ox = window_count(cfg, Source::O, Source::X);
  c.n_xo = window_count(cfg, Source::X, Source::O);
  c.n_zz = window_count(cfg, Source::Z, Source::Z);
  c.a0x = a0x;
  c.b0x = b0x;
  c.a1x = a1x;
  c.b1x = b1x;
  c.zz_scale =
      c.n_zz * poisson_weight(a.mu_z, 1) * poisson_weight(b.mu_z, 1);

  if (branch_select(cfg) == ScanBranch::BobRatioSmaller) {
    c.gamma_sp = {a1y * b2y / c.n_xx, a1x * b2x * a0y / c.n_oy,
                  a1x * b2x * b0y / c.n_yo};
    c.gamma_sm = {a1x * b2x / c.n_yy, a1x * b2x * a0y * b0y / c.n_oo};
    c.coeff_h = a1y * b2y;
    c.denom = a1x * a1y * (b1x * b2y - b2x * b1y);
  } else {
    c.gamma_sp = {a2y * b1y / c.n_xx, a2x * b1x * a0y / c.n_oy,
                  a2x * b1x * b0y / c.n_yo};
    c.gamma_sm = {a2x * b1x / c.n_yy, a2x * b1x * a0y * b0y / c.n_oo};
    c.coeff_h = a2y * b1y;
    c.denom = b1x * b1y * (a1x * a2y - a2x * a1y);
  }
  return c;
}

void require_denominator(const Coefficients& c) {
  if (!(c.denom > 0.0))
    throw std::invalid_argument(
        "degenerate configuration: the yield denominator vanishes "
        "(mu_x == mu_y on the branch side)");
}

double s_plus_bound(const Coefficients& c, double xx_term, double n_oy,
                    double n_yo, const FailureBudget& budget) {
  JointInstance inst;
  inst.gamma = c.gamma_sp;
  inst.gs = {xx_term, n_oy, n_yo};
  inst.xi = {budget.xi_s1p, budget.xi_s2p, budget.xi_s3p};
  return joint_lower(inst);
}

}  // namespace

double s_plus_star_lower(const ObservedCounts& counts,
                         const ProtocolConfig& cfg,
                         const FailureBudget& budget) {
  const double right_xx = counts.n_xx - counts.m_xx;
  if (!(right_xx >= 0.0))
    throw std::invalid_argument("m_xx exceeds n_xx");
  const Coefficients c = compute_coefficients(cfg);
  return s_plus_bound(c, right_xx, counts.n_oy, counts.n_yo, budget);
}

double s_minus_upper(const ObservedCounts& counts, const ProtocolConfig& cfg,
                     const FailureBudget& budget) {
  const Coefficients c = compute_coefficients(cfg);
  JointInstance inst;
  inst.gamma = {c.gamma_sm[0], c.gamma_sm[1], 0.0};
  inst.gs = {counts.n_yy, counts.n_oo, 0.0};
  inst.xi = {budget.xi_s1m, budget.xi_s2m, 0.0};
  return joint_upper(inst);
}

std::pair<double, double> h_bounds(const ObservedCounts& counts,
                                   const ProtocolConfig& cfg,
                                   const FailureBudget& budget) {
  const Coefficients c = compute_coefficients(cfg);
  JointInstance inst;
  inst.gamma = {c.a0x / c.n_ox, c.b0x / c.n_xo, 0.0};
  inst.gs = {counts.n_ox, counts.n_xo, 0.0};
  const double oo_weight = c.a0x * c.b0x / c.n_oo;

  inst.xi = {budget.xi_h1l, budget.xi_h2l, 0.0};
  double lower = joint_lower(inst) -
                 oo_weight * expected_upper(counts.n_oo,
                                            FailureProb(budget.xi_h3l));
  // H is a sum of nonnegative vacuum-window rates minus a correction; a
  // negative lower bound is vacuous.
  lower = std::max(lower, 0.0);

  inst.xi = {budget.xi_h1u, budget.xi_h2u, 0.0};
  const double upper = joint_upper(inst) -
                       oo_weight * expected_lower(counts.n_oo,
                                                  FailureProb(budget.xi_h3u));
  return {lower, upper};
}

std::pair<double, double> m_bounds(const ObservedCounts& counts,
                                   const FailureBudget& budget) {
  return {expected_lower(counts.m_xx, FailureProb(budget.xi_ml)),
          expected_upper(counts.m_xx, FailureProb(budget.xi_mu))};
}

double s11x_lower(double h, double m, const JointParts& parts,
                  const ProtocolConfig& cfg) {
  const Coefficients c = compute_coefficients(cfg);
  require_denominator(c);
  const double numerator = parts.s_plus_lower + (c.coeff_h / c.n_xx) * m -
                           parts.s_minus_upper - c.coeff_h * h;
  return std::clamp(numerator / c.denom, 0.0, 1.0);
}

double e11bit_upper(double h, double m, double s11x_l,
                    const ProtocolConfig& cfg) {
  if (!(s11x_l > 0.0))
    throw std::domain_error("e11bit_upper requires a positive yield bound");
  const Coefficients c = compute_coefficients(cfg);
  const double numerator = m / c.n_xx - 0.5 * h;
  if (numerator <= 0.0) return 0.0;
  return std::min(numerator / (c.a1x * c.b1x * s11x_l), 0.5);
}

double s11z_lower(double s11x_l, const ProtocolConfig& cfg,
                  const FailureBudget& budget) {
  const Coefficients c = compute_coefficients(cfg);
  return observed_lower(c.zz_scale * s11x_l, FailureProb(budget.xi_s11)) /
         c.zz_scale;
}

double e11ph_upper(double s11z_l, double e11bit_u, const ProtocolConfig& cfg,
                   const FailureBudget& budget) {
  if (!(s11z_l > 0.0))
    throw std::domain_error("e11ph_upper requires a positive yield bound");
  const Coefficients c = compute_coefficients(cfg);
  const double valid = c.zz_scale * s11z_l;
  return std::min(
      observed_upper(valid * e11bit_u, FailureProb(budget.xi_e11)) / valid,
      0.5);
}

namespace {

// Everything needed to evaluate R(H, M) at one scan point.
struct RateEvaluator {
  double s_plus = 0.0;
  double s_minus = 0.0;
  double coeff_h = 0.0;
  double coeff_m = 0.0;  // coeff_h / N_xx; 0 in single-scan mode
  double denom = 1.0;
  double inv_n_xx = 0.0;
  double a1x_b1x = 0.0;
  double zz_scale = 0.0;
  double xi_s11 = 0.0;
  double xi_e11 = 0.0;
  double rate_scale = 0.0;   // p_zA p_zB a1z b1z
  double rate_offset = 0.0;  // p_zA p_zB f S_zz h(E_zz) + corrections

  // Unclamped key rate; degenerate points (vanishing yield) count as 0.
  double rate_at(double h, double m, double* s11z_out = nullptr,
                 double* e11ph_out = nullptr) const {
    if (s11z_out) *s11z_out = 0.0;
    if (e11ph_out) *e11ph_out = 0.0;
    const double numerator = s_plus + coeff_m * m - s_minus - coeff_h * h;
    const double s11x = std::clamp(numerator / denom, 0.0, 1.0);
    if (!(s11x > 0.0)) return 0.0;
    const double ebit_num = m * inv_n_xx - 0.5 * h;
    double ebit = 0.0;
    if (ebit_num > 0.0)
      ebit = std::min(ebit_num / (a1x_b1x * s11x), 0.5);
    const double s11z =
        observed_lower(zz_scale * s11x, FailureProb(xi_s11)) / zz_scale;
    if (!(s11z > 0.0)) return 0.0;
    const double valid = zz_scale * s11z;
    const double e11ph = std::min(
        observed_upper(valid * ebit, FailureProb(xi_e11)) / valid, 0.5);
    if (s11z_out) *s11z_out = s11z;
    if (e11ph_out) *e11ph_out = e11ph;
    return rate_scale * s11z * (1.0 - binary_entropy(e11ph)) - rate_offset;
  }
};

RateEvaluator make_evaluator(const Coefficients& c,
                             const ObservedCounts& counts,
                             const ProtocolConfig& cfg,
                             const FailureBudget& budget, ScanMode mode,
                             double f_ec) {
  require_denominator(c);
  RateEvaluator ev;
  ev.coeff_h = c.coeff_h;
  ev.coeff_m = mode == ScanMode::Double ? c.coeff_h / c.n_xx : 0.0;
  ev.denom = c.denom;
  ev.inv_n_xx = 1.0 / c.n_xx;
  ev.a1x_b1x = c.a1x * c.b1x;
  ev.zz_scale = c.zz_scale;
  ev.xi_s11 = budget.xi_s11;
  ev.xi_e11 = budget.xi_e11;
  const double pz = cfg.alice.p_z * cfg.bob.p_z;
  // zz_scale = N_zz a1z b1z = p_zA p_zB N a1z b1z, so the rate prefactor
  // p_zA p_zB a1z b1z is zz_scale / N.
  ev.rate_scale = c.zz_scale / cfg.pulse_pairs;
  const double s_zz = counts.n_zz / c.n_zz;
  const double e_zz = counts.n_zz > 0.0 ? counts.m_zz / counts.n_zz : 0.0;
  const double correction =
      (std::log2(8.0 / budget.eps_cor) +
       2.0 * std::log2(2.0 / (budget.eps_prime * budget.eps_hat)) +
       2.0 * std::log2(1.0 / (2.0 * budget.eps_pa))) /
      cfg.pulse_pairs;
  ev.rate_offset = pz * f_ec * s_zz * binary_entropy(e_zz) + correction;
  return ev;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (!(hi > lo)) return {lo};
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i)
    out[i] = lo + (hi - lo) * i / static_cast<double>(points - 1);
  out.back() = hi;
  return out;
}

DecoyEstimate scan_rectangle(const RateEvaluator& ev, double h_lo, double h_hi,
                             double m_lo, double m_hi,
                             const ScanSettings& scan, bool two_d) {
  if (!(h_hi >= h_lo) || !(m_hi >= m_lo))
    throw std::invalid_argument("scan rectangle is empty (bounds crossed)");
  if (scan.grid_h < 2 || scan.grid_m < 2)
    throw std::invalid_argument("scan grids need at least 2 points");
  if (scan.refine_rounds < 0)
    throw std::invalid_argument("refinement rounds must be nonnegative");

  const double h_lo0 = h_lo, h_hi0 = h_hi, m_lo0 = m_lo, m_hi0 = m_hi;
  double best = 0.0, best_h = h_lo, best_m = m_lo;
  bool have_best = false;
  double round_min_prev = 0.0, round_min_last = 0.0;

  const int rounds = 1 + scan.refine_rounds;
  for (int round = 0; round < rounds; ++round) {
    const auto hs = linspace(h_lo, h_hi, scan.grid_h);
    const auto ms =
        two_d ? linspace(m_lo, m_hi, scan.grid_m) : std::vector<double>{m_lo};
    double round_min = 0.0, round_h = hs.front(), round_m = ms.front();
    bool first = true;
    for (double h : hs) {
      for (double m : ms) {
        const double r = ev.rate_at(h, m);
        if (first || r < round_min) {
          round_min = r;
          round_h = h;
          round_m = m;
          first = false;
        }
      }
    }
    if (!have_best || round_min < best) {
      best = round_min;
      best_h = round_h;
      best_m = round_m;
      have_best = true;
    }
    round_min_prev = round == 0 ? round_min : round_min_last;
    round_min_last = round_min;
    if (round + 1 < rounds) {
      // Zoom a fifth-width window around the incumbent, inside the original
      // rectangle.
      const double h_width = (h_hi - h_lo) / 5.0;
      h_lo = std::max(h_lo0, round_h - 0.5 * h_width);
      h_hi = std::min(h_hi0, round_h + 0.5 * h_width);
      if (two_d) {
        const double m_width = (m_hi - m_lo) / 5.0;
        m_lo = std::max(m_lo0, round_m - 0.5 * m_width);
        m_hi = std::min(m_hi0, round_m + 0.5 * m_width);
      }
    }
  }

  DecoyEstimate est;
  est.worst_h = best_h;
  est.worst_m = best_m;
  est.grid_margin =
      rounds > 1 ? std::abs(round_min_last - round_min_prev) : 0.0;
  est.scanned_rate = best - est.grid_margin;
  ev.rate_at(best_h, best_m, &est.s11z_lower, &est.e11ph_upper);
  return est;
}

}  // namespace

DecoyEstimate single_scan(const ObservedCounts& counts,
                          const ProtocolConfig& cfg,
                          const FailureBudget& budget,
                          const ScanSettings& scan,
                          double error_correction_inefficiency) {
  counts.validate();
  budget.validate(ScanMode::Single);
  const Coefficients c = compute_coefficients(cfg);
  RateEvaluator ev = make_evaluator(c, counts, cfg, budget, ScanMode::Single,
                                    error_correction_inefficiency);
  ev.s_plus = s_plus_bound(c, counts.n_xx, counts.n_oy, counts.n_yo, budget);
  ev.s_minus = s_minus_upper(counts, cfg, budget);
  const auto [h_lo, h_hi] = h_bounds(counts, cfg, budget);
  const double m_up =
      expected_upper(counts.m_xx, FailureProb(budget.xi_mu));
  return scan_rectangle(ev, h_lo, h_hi, m_up, m_up, scan, /*two_d=*/false);
}

DecoyEstimate double_scan(const ObservedCounts& counts,
                          const ProtocolConfig& cfg,
                          const FailureBudget& budget,
                          const ScanSettings& scan,
                          double error_correction_inefficiency) {
  counts.validate();
  budget.validate(ScanMode::Double);
  const Coefficients c = compute_coefficients(cfg);
  RateEvaluator ev = make_evaluator(c, counts, cfg, budget, ScanMode::Double,
                                    error_correction_inefficiency);
  ev.s_plus = s_plus_star_lower(counts, cfg, budget);
  ev.s_minus = s_minus_upper(counts, cfg, budget);
  const auto [h_lo, h_hi] = h_bounds(counts, cfg, budget);
  const auto [m_lo, m_hi] = m_bounds(counts, budget);
  return scan_rectangle(ev, h_lo, h_hi, m_lo, m_hi, scan, /*two_d=*/true);
}

}  // namespace mdiqkd
