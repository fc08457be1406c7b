#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rng.hpp"

namespace mdiqkd {

std::string ExperimentSpec::mode_label() const {
  std::string label = scan_mode_name(scan_mode);
  label += "-";
  label += optimize_enabled ? optimize_mode_name(opt_mode) : "none";
  label += three_intensity ? "-3int" : "-4int";
  return label;
}

std::pair<double, double> split_distance(double total_km, double offset_km) {
  const double l_a = 0.5 * (total_km + offset_km);
  const double l_b = 0.5 * (total_km - offset_km);
  if (!(l_a >= 0.0) || !(l_b >= 0.0))
    throw std::invalid_argument(
        "distance offset exceeds the total fiber length");
  return {l_a, l_b};
}

namespace {

constexpr const char* kCountNames[12] = {"n_oo", "n_ox", "n_xo", "n_oy",
                                         "n_yo", "n_xx", "n_xy", "n_yx",
                                         "n_yy", "n_zz", "m_xx", "m_zz"};

double& count_field(ObservedCounts& c, int i) {
  switch (i) {
    case 0: return c.n_oo;
    case 1: return c.n_ox;
    case 2: return c.n_xo;
    case 3: return c.n_oy;
    case 4: return c.n_yo;
    case 5: return c.n_xx;
    case 6: return c.n_xy;
    case 7: return c.n_yx;
    case 8: return c.n_yy;
    case 9: return c.n_zz;
    case 10: return c.m_xx;
    default: return c.m_zz;
  }
}

}  // namespace

void write_counts_csv(const ObservedCounts& counts, std::ostream& out) {
  out << "name,value\n";
  ObservedCounts copy = counts;
  for (int i = 0; i < 12; ++i)
    out << kCountNames[i] << ',' << Table::format_number(count_field(copy, i))
        << '\n';
}

ObservedCounts read_counts_csv(std::istream& in) {
  ObservedCounts counts;
  bool seen[12] = {false};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("name,", 0) == 0) continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("counts line " + std::to_string(line_no) +
                                  ": expected name,value");
    const std::string name = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    int idx = -1;
    for (int i = 0; i < 12; ++i)
      if (name == kCountNames[i]) idx = i;
    if (idx < 0)
      throw std::invalid_argument("counts line " + std::to_string(line_no) +
                                  ": unknown entry '" + name + "'");
    if (seen[idx])
      throw std::invalid_argument("counts line " + std::to_string(line_no) +
                                  ": duplicate entry '" + name + "'");
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      throw std::invalid_argument("counts line " + std::to_string(line_no) +
                                  ": '" + value + "' is not a number");
    count_field(counts, idx) = v;
    seen[idx] = true;
  }
  for (int i = 0; i < 12; ++i)
    if (!seen[i])
      throw std::invalid_argument(std::string("counts file is missing '") +
                                  kCountNames[i] + "'");
  return counts;
}

std::vector<std::string> counts_validation_errors(
    const ObservedCounts& counts) {
  std::vector<std::string> errors;
  ObservedCounts copy = counts;
  for (int i = 0; i < 12; ++i) {
    if (!(count_field(copy, i) >= 0.0))
      errors.push_back(std::string(kCountNames[i]) + " is negative");
  }
  if (counts.m_xx > counts.n_xx) errors.push_back("m_xx exceeds n_xx");
  if (counts.m_zz > counts.n_zz) errors.push_back("m_zz exceeds n_zz");
  return errors;
}

namespace {

// Full resolved-parameter column set; every row of a report table can be
// replayed through `estimate` with a counts file.
const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "L_km",       "L_A_km",     "L_B_km",   "mode",      "rate",
      "s11z_L",     "e11ph_U",    "H_star",   "M_star",    "eps_total",
      "no_key_reason", "S_zz",    "E_zz",     "scan_margin",
      "N",          "alpha_db_per_km", "detector_efficiency",
      "dark_count_prob", "misalignment", "f_ec", "eps_total_target",
      "mu_xA",      "mu_yA",      "mu_zA",    "p_xA",      "p_yA",
      "p_zA",       "mu_xB",      "mu_yB",    "mu_zB",     "p_xB",
      "p_yB",       "p_zB",       "xi_s1p",   "xi_s2p",    "xi_s3p",
      "xi_s1m",     "xi_s2m",     "xi_h1l",   "xi_h2l",    "xi_h3l",
      "xi_h1u",     "xi_h2u",     "xi_h3u",   "xi_ml",     "xi_mu",
      "xi_s11",     "xi_e11",     "eps_cor",  "eps_prime", "eps_hat",
      "eps_pa",     "grid_h",     "grid_m",   "refine_rounds", "seed"};
  return cols;
}

std::vector<Table::Cell> report_row(const ExperimentSpec& spec,
                                    const ChannelParams& resolved_channel,
                                    const KeyRateReport& report,
                                    const ProtocolConfig& cfg,
                                    const FailureBudget& budget) {
  const double l_a = resolved_channel.fiber_km_alice;
  const double l_b = resolved_channel.fiber_km_bob;
  std::vector<Table::Cell> row;
  row.reserve(report_columns().size());
  row.emplace_back(l_a + l_b);
  row.emplace_back(l_a);
  row.emplace_back(l_b);
  row.emplace_back(spec.mode_label());
  row.emplace_back(report.rate_per_pulse);
  row.emplace_back(report.s11z_lower);
  row.emplace_back(report.e11ph_upper);
  row.emplace_back(report.worst_h);
  row.emplace_back(report.worst_m);
  row.emplace_back(report.eps_total);
  row.emplace_back(report.no_key ? report.no_key_reason : std::string("ok"));
  row.emplace_back(report.s_zz);
  row.emplace_back(report.e_zz);
  row.emplace_back(report.scan_margin);
  row.emplace_back(cfg.pulse_pairs);
  row.emplace_back(resolved_channel.loss_db_per_km);
  row.emplace_back(resolved_channel.detector_efficiency);
  row.emplace_back(resolved_channel.dark_count_prob);
  row.emplace_back(resolved_channel.misalignment);
  row.emplace_back(resolved_channel.error_correction_inefficiency);
  row.emplace_back(spec.eps_total);
  row.emplace_back(cfg.alice.mu_x);
  row.emplace_back(cfg.alice.mu_y);
  row.emplace_back(cfg.alice.mu_z);
  row.emplace_back(cfg.alice.p_x);
  row.emplace_back(cfg.alice.p_y);
  row.emplace_back(cfg.alice.p_z);
  row.emplace_back(cfg.bob.mu_x);
  row.emplace_back(cfg.bob.mu_y);
  row.emplace_back(cfg.bob.mu_z);
  row.emplace_back(cfg.bob.p_x);
  row.emplace_back(cfg.bob.p_y);
  row.emplace_back(cfg.bob.p_z);
  row.emplace_back(budget.xi_s1p);
  row.emplace_back(budget.xi_s2p);
  row.emplace_back(budget.xi_s3p);
  row.emplace_back(budget.xi_s1m);
  row.emplace_back(budget.xi_s2m);
  row.emplace_back(budget.xi_h1l);
  row.emplace_back(budget.xi_h2l);
  row.emplace_back(budget.xi_h3l);
  row.emplace_back(budget.xi_h1u);
  row.emplace_back(budget.xi_h2u);
  row.emplace_back(budget.xi_h3u);
  row.emplace_back(budget.xi_ml);
  row.emplace_back(budget.xi_mu);
  row.emplace_back(budget.xi_s11);
  row.emplace_back(budget.xi_e11);
  row.emplace_back(budget.eps_cor);
  row.emplace_back(budget.eps_prime);
  row.emplace_back(budget.eps_hat);
  row.emplace_back(budget.eps_pa);
  row.emplace_back(static_cast<double>(spec.scan.grid_h));
  row.emplace_back(static_cast<double>(spec.scan.grid_m));
  row.emplace_back(static_cast<double>(spec.scan.refine_rounds));
  row.emplace_back(static_cast<double>(spec.optimizer.seed));
  return row;
}

ChannelParams resolve_channel(const ExperimentSpec& spec, double total_km,
                              double offset_km) {
  ChannelParams ch = spec.channel;
  const auto [l_a, l_b] = split_distance(total_km, offset_km);
  ch.fiber_km_alice = l_a;
  ch.fiber_km_bob = l_b;
  ch.validate();
  return ch;
}

ProtocolConfig explicit_config(const ExperimentSpec& spec) {
  if (!spec.alice || !spec.bob)
    throw std::invalid_argument(
        "this run mode needs explicit [protocol.alice] and [protocol.bob] "
        "source parameters");
  ProtocolConfig cfg{*spec.alice, *spec.bob, spec.pulse_pairs};
  cfg.validate();
  return cfg;
}

FailureBudget resolve_budget(const ExperimentSpec& spec) {
  FailureBudget budget =
      spec.explicit_budget
          ? *spec.explicit_budget
          : FailureBudget::uniform(spec.eps_total, spec.scan_mode);
  budget.eps_pa = solve_eps_pa(budget, spec.eps_total, spec.scan_mode);
  return budget;
}

OptimizeProblem make_problem(const ExperimentSpec& spec,
                             const ChannelParams& resolved_channel,
                             int optimizer_threads) {
  OptimizeProblem problem;
  problem.pulse_pairs = spec.pulse_pairs;
  problem.channel = resolved_channel;
  problem.scan_mode = spec.scan_mode;
  problem.opt_mode = spec.opt_mode;
  problem.symmetric =
      resolved_channel.fiber_km_alice == resolved_channel.fiber_km_bob;
  problem.three_intensity = spec.three_intensity;
  problem.eps_total_target = spec.eps_total;
  problem.search_scan = spec.search_scan;
  problem.final_scan = spec.scan;
  (void)optimizer_threads;
  return problem;
}

struct PointResult {
  KeyRateReport report;
  ProtocolConfig config;
  FailureBudget budget;
  ChannelParams channel;
};

// Analysis of one geometry point: either a fixed-parameter estimate or a
// full optimization run.
PointResult analyze_point(const ExperimentSpec& spec, double total_km,
                          double offset_km, std::uint64_t seed,
                          int optimizer_threads) {
  PointResult out;
  out.channel = resolve_channel(spec, total_km, offset_km);
  if (spec.optimize_enabled) {
    OptimizeProblem problem = make_problem(spec, out.channel, optimizer_threads);
    OptimizerSettings settings = spec.optimizer;
    settings.seed = seed;
    settings.threads = optimizer_threads;
    const OptimizeOutcome outcome = optimize(problem, settings);
    out.report = outcome.report;
    out.config = outcome.config;
    out.budget = outcome.budget;
    return out;
  }
  out.config = explicit_config(spec);
  out.budget = resolve_budget(spec);
  const ObservedCounts counts = simulate_expected_counts(out.config, out.channel);
  const DecoyEstimate est =
      spec.scan_mode == ScanMode::Double
          ? double_scan(counts, out.config, out.budget, spec.scan,
                        out.channel.error_correction_inefficiency)
          : single_scan(counts, out.config, out.budget, spec.scan,
                        out.channel.error_correction_inefficiency);
  out.report =
      compose_report(est, counts, out.config, out.budget, spec.scan_mode);
  return out;
}

std::vector<double> sweep_distances(const ExperimentSpec& spec) {
  if (!(spec.sweep_step_km > 0.0))
    throw std::invalid_argument("sweep step must be positive");
  if (!(spec.sweep_stop_km >= spec.sweep_start_km))
    throw std::invalid_argument("sweep stop must be >= start");
  std::vector<double> out;
  for (double l = spec.sweep_start_km;
       l <= spec.sweep_stop_km + 1e-9 * spec.sweep_step_km;
       l += spec.sweep_step_km)
    out.push_back(l);
  if (out.empty()) throw std::invalid_argument("sweep is empty");
  return out;
}

int resolved_threads(const ExperimentSpec& spec) {
  if (spec.threads > 0) return spec.threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void progress_line(const ExperimentSpec& spec, const std::string& text) {
  if (spec.progress) std::fprintf(stderr, "[mdiqkd] %s\n", text.c_str());
}

// Sweep points run in parallel; rows are committed in distance order.
std::vector<PointResult> analyze_sweep(const ExperimentSpec& spec,
                                       const std::vector<double>& distances,
                                       double offset_km) {
  const int total_threads = resolved_threads(spec);
  const int point_threads =
      static_cast<int>(std::min<std::size_t>(total_threads, distances.size()));
  const int optimizer_threads =
      std::max(1, total_threads / std::max(1, point_threads));
  std::vector<PointResult> results(distances.size());
  std::vector<std::string> errors(distances.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < distances.size();
         i = next.fetch_add(1)) {
      try {
        results[i] = analyze_point(spec, distances[i], offset_km,
                                   derive_stream(spec.optimizer.seed, i),
                                   optimizer_threads);
        progress_line(spec, "L=" + std::to_string(distances[i]) + " km rate=" +
                                Table::format_number(
                                    results[i].report.rate_per_pulse));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (point_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < point_threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < distances.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("sweep point " + std::to_string(distances[i]) +
                               " km failed: " + errors[i]);
  return results;
}

}  // namespace

Table run_simulate(const ExperimentSpec& spec) {
  const ProtocolConfig cfg = explicit_config(spec);
  const ChannelParams ch =
      resolve_channel(spec, spec.distance_km, spec.offset_km);
  ObservedCounts counts = simulate_expected_counts(cfg, ch);
  if (spec.poisson_sampling)
    counts = sample_observed_counts(counts, spec.sampling_seed);
  Table table({"name", "value"});
  ObservedCounts copy = counts;
  for (int i = 0; i < 12; ++i)
    table.add_row({std::string(kCountNames[i]), count_field(copy, i)});
  return table;
}

Table run_estimate(const ExperimentSpec& spec, const ObservedCounts& counts) {
  const auto errors = counts_validation_errors(counts);
  if (!errors.empty()) {
    std::string message = "invalid counts:";
    for (const auto& e : errors) message += " [" + e + "]";
    throw std::invalid_argument(message);
  }
  const ProtocolConfig cfg = explicit_config(spec);
  const ChannelParams ch =
      resolve_channel(spec, spec.distance_km, spec.offset_km);
  const FailureBudget budget = resolve_budget(spec);
  const DecoyEstimate est =
      spec.scan_mode == ScanMode::Double
          ? double_scan(counts, cfg, budget, spec.scan,
                        ch.error_correction_inefficiency)
          : single_scan(counts, cfg, budget, spec.scan,
                        ch.error_correction_inefficiency);
  const KeyRateReport report =
      compose_report(est, counts, cfg, budget, spec.scan_mode);
  Table table(report_columns());
  table.add_row(report_row(spec, ch, report, cfg, budget));
  return table;
}

Table run_optimize(const ExperimentSpec& spec) {
  ExperimentSpec single = spec;
  single.optimize_enabled = true;
  const PointResult r =
      analyze_point(single, spec.distance_km, spec.offset_km,
                    spec.optimizer.seed, resolved_threads(spec));
  Table table(report_columns());
  table.add_row(report_row(spec, r.channel, r.report, r.config, r.budget));
  return table;
}

Table run_curve(const ExperimentSpec& spec) {
  const auto distances = sweep_distances(spec);
  const auto results = analyze_sweep(spec, distances, spec.sweep_offset_km);
  Table table(report_columns());
  for (const auto& r : results)
    table.add_row(report_row(spec, r.channel, r.report, r.config, r.budget));
  return table;
}

Table run_compare(const ExperimentSpec& spec) {
  ExperimentSpec arm_a = spec;
  ExperimentSpec arm_b = spec;
  if (spec.compare_kind == CompareKind::ScanMethods) {
    arm_a.scan_mode = ScanMode::Single;
    arm_b.scan_mode = ScanMode::Double;
  } else {
    arm_a.three_intensity = false;
    arm_b.three_intensity = true;
  }
  const auto distances = sweep_distances(spec);
  const auto results_a = analyze_sweep(arm_a, distances, spec.sweep_offset_km);
  const auto results_b = analyze_sweep(arm_b, distances, spec.sweep_offset_km);

  std::vector<std::string> columns = {"L_km", "L_A_km", "L_B_km", "ratio"};
  for (const auto& c : report_columns())
    if (c != "L_km" && c != "L_A_km" && c != "L_B_km")
      columns.push_back("a_" + c);
  for (const auto& c : report_columns())
    if (c != "L_km" && c != "L_A_km" && c != "L_B_km")
      columns.push_back("b_" + c);

  Table table(columns);
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const auto row_a = report_row(arm_a, results_a[i].channel,
                                  results_a[i].report, results_a[i].config,
                                  results_a[i].budget);
    const auto row_b = report_row(arm_b, results_b[i].channel,
                                  results_b[i].report, results_b[i].config,
                                  results_b[i].budget);
    std::vector<Table::Cell> row;
    row.reserve(columns.size());
    row.push_back(row_a[0]);
    row.push_back(row_a[1]);
    row.push_back(row_a[2]);
    const double rate_a = results_a[i].report.rate_per_pulse;
    const double rate_b = results_b[i].report.rate_per_pulse;
    row.emplace_back(rate_a > 0.0
                         ? rate_b / rate_a
                         : std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 3; c < row_a.size(); ++c) row.push_back(row_a[c]);
    for (std::size_t c = 3; c < row_b.size(); ++c) row.push_back(row_b[c]);
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace mdiqkd
