#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "channel.hpp"
#include "estimator.hpp"
#include "keyrate.hpp"

namespace mdiqkd {

struct OptimizerSettings {
  double step = 0.1;      // initial step, relative to each coordinate's box
  double min_step = 1e-5;
  int max_fails = 300;    // trials per step level before shrinking by 5
  int restarts = 4;
  std::uint64_t seed = 1;
  int threads = 0;        // 0: one thread per restart, capped by hardware

  void validate() const;
};

struct SearchTrace {
  std::vector<double> incumbents;  // accepted objective values, in order
  long evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;
using Projection = std::function<void(std::span<double>)>;

struct SearchResult {
  std::vector<double> point;
  double value = 0.0;
  long evaluations = 0;
};

// Randomized hill climb: draw a Gaussian direction over the active
// coordinates, normalize it, step by step * scale, keep the move only if the
// objective improves; after max_fails consecutive rejections divide the step
// by 5; stop when it falls below min_step. Deterministic for a fixed
// (seed, stream) pair. `project` maps proposals back into the feasible set
// before evaluation. Throws if the start is not strictly positive.
SearchResult random_direction_search(const Objective& objective,
                                     std::vector<double> start,
                                     std::span<const double> scale,
                                     const OptimizerSettings& settings,
                                     std::uint64_t stream,
                                     const Projection& project = nullptr,
                                     SearchTrace* trace = nullptr);

enum class OptimizeMode { SourceOnly, AllParams };  // SPO vs APO

const char* optimize_mode_name(OptimizeMode mode);

struct OptimizeProblem {
  double pulse_pairs = 1e10;
  ChannelParams channel;
  ScanMode scan_mode = ScanMode::Double;
  OptimizeMode opt_mode = OptimizeMode::SourceOnly;
  bool symmetric = true;         // tie Bob's source parameters to Alice's
  bool three_intensity = false;  // tie mu_z to mu_y per side
  double eps_total_target = 1e-10;
  ScanSettings search_scan{21, 21, 1};   // surrogate grid during the walk
  ScanSettings final_scan{101, 101, 2};  // grid for the reported rate
  // Optional warm start (e.g. seed the all-parameter run with the
  // source-only optimum).
  std::optional<ProtocolConfig> start_hint;
};

struct OptimizeOutcome {
  KeyRateReport report;  // evaluated on final_scan at the best parameters
  ProtocolConfig config;
  FailureBudget budget;
  bool found_key = false;
  long evaluations = 0;
};

// Coarse lattice probe for a configuration with positive key rate; empty if
// the lattice finds none (no key at this distance).
std::optional<ProtocolConfig> find_feasible_start(const OptimizeProblem& problem);

OptimizeOutcome optimize(const OptimizeProblem& problem,
                         const OptimizerSettings& settings);

}  // namespace mdiqkd
