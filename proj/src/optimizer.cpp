#include "optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "rng.hpp"

namespace mdiqkd {

void OptimizerSettings::validate() const {
  if (!(min_step > 0.0) || !(min_step < step))
    throw std::invalid_argument("optimizer needs 0 < min_step < step");
  if (max_fails < 1) throw std::invalid_argument("max_fails must be >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
}

SearchResult random_direction_search(const Objective& objective,
                                     std::vector<double> start,
                                     std::span<const double> scale,
                                     const OptimizerSettings& settings,
                                     std::uint64_t stream,
                                     const Projection& project,
                                     SearchTrace* trace) {
  settings.validate();
  const std::size_t dims = start.size();
  if (dims == 0) throw std::invalid_argument("search space is empty");
  if (scale.size() != dims)
    throw std::invalid_argument("scale vector size mismatch");
  if (project) project(start);
  double best = objective(start);
  long evaluations = 1;
  if (!(best > 0.0))
    throw std::invalid_argument(
        "random-direction search requires a start with positive objective");
  if (trace) trace->incumbents.push_back(best);

  std::mt19937_64 gen(derive_stream(settings.seed, stream));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> direction(dims), candidate(dims);

  double step = settings.step;
  while (step >= settings.min_step) {
    int fails = 1;
    while (fails <= settings.max_fails) {
      double norm_sq = 0.0;
      for (std::size_t i = 0; i < dims; ++i) {
        direction[i] = gauss(gen);
        norm_sq += direction[i] * direction[i];
      }
      const double inv_norm = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;
      for (std::size_t i = 0; i < dims; ++i)
        candidate[i] = start[i] + step * scale[i] * direction[i] * inv_norm;
      if (project) project(candidate);
      const double value = objective(candidate);
      ++evaluations;
      if (value > best) {
        best = value;
        start = candidate;
        fails = 1;
        if (trace) trace->incumbents.push_back(best);
      } else {
        ++fails;
      }
    }
    step /= 5.0;
  }
  if (trace) trace->evaluations = evaluations;
  return {std::move(start), best, evaluations};
}

const char* optimize_mode_name(OptimizeMode mode) {
  return mode == OptimizeMode::SourceOnly ? "spo" : "apo";
}

namespace {

constexpr double kMinVacuumProb = 1e-3;  // keep N_oo comfortably positive
constexpr double kLogBudgetLo = -30.0;   // log10 box of the budget entries
constexpr double kLogBudgetHi = -2.0;

// Searchable coordinate layout for a given mode-flag combination. Source
// parameters are linear, budget entries are searched as log10 values.
struct ParamSpace {
  struct Coord {
    std::string name;
    double lo, hi;
  };

  bool symmetric = true;
  bool three_intensity = false;
  OptimizeMode opt_mode = OptimizeMode::SourceOnly;
  ScanMode scan_mode = ScanMode::Double;
  double eps_total_target = 1e-10;
  double pulse_pairs = 0.0;
  std::vector<Coord> coords;
  std::size_t per_side = 0;  // source coordinates per party

  static ParamSpace build(const OptimizeProblem& problem) {
    ParamSpace space;
    space.symmetric = problem.symmetric;
    space.three_intensity = problem.three_intensity;
    space.opt_mode = problem.opt_mode;
    space.scan_mode = problem.scan_mode;
    space.eps_total_target = problem.eps_total_target;
    space.pulse_pairs = problem.pulse_pairs;
    auto add_side = [&space](const char* side) {
      auto nm = [side](const char* base) {
        return std::string(base) + "_" + side;
      };
      space.coords.push_back({nm("p_x"), 1e-4, 0.995});
      space.coords.push_back({nm("p_y"), 1e-4, 0.995});
      space.coords.push_back({nm("p_z"), 1e-4, 0.995});
      space.coords.push_back({nm("mu_x"), 1e-4, 1.2});
      space.coords.push_back({nm("mu_y"), 1e-4, 1.2});
      if (!space.three_intensity) space.coords.push_back({nm("mu_z"), 1e-4, 1.2});
    };
    add_side("a");
    space.per_side = space.coords.size();
    if (!space.symmetric) add_side("b");
    if (space.opt_mode == OptimizeMode::AllParams) {
      const char* names[] = {"xi_s1p", "xi_s2p", "xi_s3p", "xi_s1m",
                             "xi_s2m", "xi_h1l", "xi_h2l", "xi_h3l",
                             "xi_h1u", "xi_h2u", "xi_h3u", "xi_ml",
                             "xi_mu",  "xi_s11", "xi_e11", "eps_cor",
                             "eps_prime", "eps_hat"};
      for (const char* name : names) {
        if (space.scan_mode == ScanMode::Single &&
            std::string(name) == "xi_ml")
          continue;  // never evaluated by the single-scanning pipeline
        space.coords.push_back({name, kLogBudgetLo, kLogBudgetHi});
      }
    }
    return space;
  }

  std::size_t size() const { return coords.size(); }

  std::vector<double> scales() const {
    std::vector<double> s(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
      s[i] = coords[i].hi - coords[i].lo;
    return s;
  }

  // Clip into the boxes, then restore the ordering and probability-sum
  // constraints deterministically.
  void project(std::span<double> x) const {
    for (std::size_t i = 0; i < coords.size(); ++i)
      x[i] = std::clamp(x[i], coords[i].lo, coords[i].hi);
    const int sides = symmetric ? 1 : 2;
    for (int s = 0; s < sides; ++s) {
      double* p = x.data() + s * per_side;
      const double sum = p[0] + p[1] + p[2];
      if (sum > 1.0 - kMinVacuumProb) {
        const double shrink = (1.0 - kMinVacuumProb) / sum;
        p[0] *= shrink;
        p[1] *= shrink;
        p[2] *= shrink;
      }
      if (p[3] > p[4]) p[3] = p[4];  // mu_x <= mu_y
    }
  }

  void decode_side(std::span<const double> x, std::size_t base,
                   SourceSide* side) const {
    side->p_x = x[base + 0];
    side->p_y = x[base + 1];
    side->p_z = x[base + 2];
    side->mu_x = x[base + 3];
    side->mu_y = x[base + 4];
    side->mu_z = three_intensity ? side->mu_y : x[base + 5];
  }

  // Decodes the source part; the budget part (when searched) is returned
  // without eps_pa, which the caller derives from the fixed target.
  void decode(std::span<const double> x, ProtocolConfig* cfg,
              FailureBudget* budget) const {
    decode_side(x, 0, &cfg->alice);
    if (symmetric) {
      cfg->bob = cfg->alice;
    } else {
      decode_side(x, per_side, &cfg->bob);
    }
    cfg->pulse_pairs = pulse_pairs;
    if (opt_mode == OptimizeMode::SourceOnly) {
      *budget = FailureBudget::uniform(eps_total_target, scan_mode);
      return;
    }
    std::size_t i = symmetric ? per_side : 2 * per_side;
    auto next = [&x, &i]() { return std::pow(10.0, x[i++]); };
    budget->xi_s1p = next();
    budget->xi_s2p = next();
    budget->xi_s3p = next();
    budget->xi_s1m = next();
    budget->xi_s2m = next();
    budget->xi_h1l = next();
    budget->xi_h2l = next();
    budget->xi_h3l = next();
    budget->xi_h1u = next();
    budget->xi_h2u = next();
    budget->xi_h3u = next();
    budget->xi_ml = scan_mode == ScanMode::Double ? next() : 1e-30;
    budget->xi_mu = next();
    budget->xi_s11 = next();
    budget->xi_e11 = next();
    budget->eps_cor = next();
    budget->eps_prime = next();
    budget->eps_hat = next();
  }

  std::vector<double> encode(const ProtocolConfig& cfg,
                             const FailureBudget& budget) const {
    std::vector<double> x(coords.size());
    auto put_side = [this, &x](const SourceSide& side, std::size_t base) {
      x[base + 0] = side.p_x;
      x[base + 1] = side.p_y;
      x[base + 2] = side.p_z;
      x[base + 3] = side.mu_x;
      x[base + 4] = side.mu_y;
      if (!three_intensity) x[base + 5] = side.mu_z;
    };
    put_side(cfg.alice, 0);
    if (!symmetric) put_side(cfg.bob, per_side);
    if (opt_mode == OptimizeMode::AllParams) {
      std::size_t i = symmetric ? per_side : 2 * per_side;
      auto put = [&x, &i](double v) { x[i++] = std::log10(v); };
      put(budget.xi_s1p);
      put(budget.xi_s2p);
      put(budget.xi_s3p);
      put(budget.xi_s1m);
      put(budget.xi_s2m);
      put(budget.xi_h1l);
      put(budget.xi_h2l);
      put(budget.xi_h3l);
      put(budget.xi_h1u);
      put(budget.xi_h2u);
      put(budget.xi_h3u);
      if (scan_mode == ScanMode::Double) put(budget.xi_ml);
      put(budget.xi_mu);
      put(budget.xi_s11);
      put(budget.xi_e11);
      put(budget.eps_cor);
      put(budget.eps_prime);
      put(budget.eps_hat);
    }
    project(x);
    return x;
  }
};

// Rate of a fully resolved parameter point, or 0 when the point is
// infeasible (budget exceeding the target, degenerate configuration).
double evaluate_point(const OptimizeProblem& problem, const ProtocolConfig& cfg,
                      FailureBudget budget, const ScanSettings& scan) {
  try {
    budget.eps_pa =
        solve_eps_pa(budget, problem.eps_total_target, problem.scan_mode);
    const ObservedCounts counts =
        simulate_expected_counts(cfg, problem.channel);
    const DecoyEstimate est =
        problem.scan_mode == ScanMode::Double
            ? double_scan(counts, cfg, budget, scan,
                          problem.channel.error_correction_inefficiency)
            : single_scan(counts, cfg, budget, scan,
                          problem.channel.error_correction_inefficiency);
    return std::max(est.scanned_rate, 0.0);
  } catch (const std::exception&) {
    return 0.0;
  }
}

}  // namespace

std::optional<ProtocolConfig> find_feasible_start(
    const OptimizeProblem& problem) {
  const FailureBudget budget =
      FailureBudget::uniform(problem.eps_total_target, problem.scan_mode);
  const double mu_x_grid[] = {0.05, 0.1, 0.2};
  const double mu_y_grid[] = {0.25, 0.4, 0.6};
  const double mu_z_grid[] = {0.4, 0.5, 0.7};
  const double p_z_grid[] = {0.3, 0.5, 0.7, 0.85};
  for (double p_z : p_z_grid) {
    for (double mu_z : mu_z_grid) {
      for (double mu_y : mu_y_grid) {
        for (double mu_x : mu_x_grid) {
          SourceSide side;
          side.mu_x = mu_x;
          side.mu_y = mu_y;
          side.mu_z = problem.three_intensity ? mu_y : mu_z;
          side.p_z = p_z;
          side.p_x = 0.35 * (1.0 - p_z);
          side.p_y = 0.25 * (1.0 - p_z);
          ProtocolConfig cfg{side, side, problem.pulse_pairs};
          if (evaluate_point(problem, cfg, budget, problem.search_scan) > 0.0)
            return cfg;
        }
      }
      if (problem.three_intensity) break;  // mu_z grid is inactive
    }
  }
  return std::nullopt;
}

OptimizeOutcome optimize(const OptimizeProblem& problem,
                         const OptimizerSettings& settings) {
  settings.validate();
  problem.channel.validate();
  const ParamSpace space = ParamSpace::build(problem);
  const std::vector<double> scales = space.scales();

  const Objective objective = [&problem, &space](std::span<const double> x) {
    ProtocolConfig cfg;
    FailureBudget budget;
    space.decode(x, &cfg, &budget);
    return evaluate_point(problem, cfg, budget, problem.search_scan);
  };
  const Projection project = [&space](std::span<double> x) {
    space.project(x);
  };

  OptimizeOutcome outcome;
  outcome.budget =
      FailureBudget::uniform(problem.eps_total_target, problem.scan_mode);

  std::optional<ProtocolConfig> start;
  if (problem.start_hint) {
    ProtocolConfig hint = *problem.start_hint;
    hint.pulse_pairs = problem.pulse_pairs;
    if (evaluate_point(problem, hint, outcome.budget, problem.search_scan) >
        0.0)
      start = hint;
  }
  if (!start) start = find_feasible_start(problem);
  if (!start) {
    outcome.report.no_key = true;
    outcome.report.no_key_reason = "no-key-at-this-distance";
    outcome.report.mode = problem.scan_mode;
    outcome.report.budget = outcome.budget;
    outcome.report.eps_total =
        epsilon_total(outcome.budget, problem.scan_mode);
    outcome.config = ProtocolConfig{{}, {}, problem.pulse_pairs};
    return outcome;
  }

  const std::vector<double> x0 = space.encode(*start, outcome.budget);

  std::vector<SearchResult> results(settings.restarts);
  std::vector<std::string> failures(settings.restarts);
  auto run_restart = [&](int r) {
    try {
      results[r] = random_direction_search(objective, x0, scales, settings,
                                           static_cast<std::uint64_t>(r),
                                           project);
    } catch (const std::exception& e) {
      failures[r] = e.what();
    }
  };

  int threads = settings.threads;
  if (threads <= 0)
    threads = static_cast<int>(
        std::min<unsigned>(settings.restarts,
                           std::max(1u, std::thread::hardware_concurrency())));
  threads = std::min(threads, settings.restarts);
  if (threads <= 1) {
    for (int r = 0; r < settings.restarts; ++r) run_restart(r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&]() {
        for (int r = next.fetch_add(1); r < settings.restarts;
             r = next.fetch_add(1))
          run_restart(r);
      });
    for (auto& t : pool) t.join();
  }

  int best = -1;
  for (int r = 0; r < settings.restarts; ++r) {
    if (!failures[r].empty()) continue;
    outcome.evaluations += results[r].evaluations;
    if (best < 0 || results[r].value > results[best].value) best = r;
  }
  if (best < 0) throw std::runtime_error("all optimizer restarts failed: " +
                                         failures[0]);

  ProtocolConfig best_cfg;
  FailureBudget best_budget;
  space.decode(results[best].point, &best_cfg, &best_budget);
  best_budget.eps_pa =
      solve_eps_pa(best_budget, problem.eps_total_target, problem.scan_mode);

  const ObservedCounts counts =
      simulate_expected_counts(best_cfg, problem.channel);
  const DecoyEstimate est =
      problem.scan_mode == ScanMode::Double
          ? double_scan(counts, best_cfg, best_budget, problem.final_scan,
                        problem.channel.error_correction_inefficiency)
          : single_scan(counts, best_cfg, best_budget, problem.final_scan,
                        problem.channel.error_correction_inefficiency);
  outcome.report =
      compose_report(est, counts, best_cfg, best_budget, problem.scan_mode);
  outcome.config = best_cfg;
  outcome.budget = best_budget;
  outcome.found_key = !outcome.report.no_key;
  return outcome;
}

}  // namespace mdiqkd
