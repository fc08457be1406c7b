#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "optimizer.hpp"
#include "table.hpp"

namespace mdiqkd {

enum class CompareKind { ScanMethods, IntensityCount };

// A fully resolved experiment description: channel and protocol constants,
// geometry (single run distance or a sweep), analysis mode, and the scan /
// optimizer knobs.
struct ExperimentSpec {
  ChannelParams channel;  // fiber lengths filled per run point
  double pulse_pairs = 1e10;
  std::optional<SourceSide> alice;  // explicit sources (simulate, estimate,
  std::optional<SourceSide> bob;    // or optimize = "none")

  double distance_km = 50.0;  // single-run geometry
  double offset_km = 0.0;     // L_A - L_B

  double sweep_start_km = 25.0;
  double sweep_stop_km = 75.0;
  double sweep_step_km = 25.0;
  double sweep_offset_km = 0.0;

  ScanMode scan_mode = ScanMode::Double;
  bool optimize_enabled = true;
  OptimizeMode opt_mode = OptimizeMode::SourceOnly;
  bool three_intensity = false;
  double eps_total = 1e-10;
  CompareKind compare_kind = CompareKind::ScanMethods;

  ScanSettings scan{101, 101, 2};
  ScanSettings search_scan{21, 21, 1};
  OptimizerSettings optimizer;

  std::optional<FailureBudget> explicit_budget;  // eps_pa derived when absent

  bool poisson_sampling = false;  // simulate: sample integer counts
  std::uint64_t sampling_seed = 1;
  int threads = 0;  // 0 = hardware
  bool progress = false;

  std::string mode_label() const;
};

// Geometry of one run point. Throws if the offset exceeds the total.
std::pair<double, double> split_distance(double total_km, double offset_km);

// Counts file round trip ("name,value" CSV, canonical entry order).
void write_counts_csv(const ObservedCounts& counts, std::ostream& out);
ObservedCounts read_counts_csv(std::istream& in);

// All ObservedCounts invariant violations, empty when valid.
std::vector<std::string> counts_validation_errors(const ObservedCounts& counts);

// Synthesizes counts for the single-run geometry; Poisson sampling is
// opt-in through the spec. Returns a "name,value" table.
Table run_simulate(const ExperimentSpec& spec);

// Analyzes externally supplied counts with the explicit source parameters,
// bypassing the channel model. Returns a one-row report table.
Table run_estimate(const ExperimentSpec& spec, const ObservedCounts& counts);

// Optimizes at the single-run geometry. Returns a one-row report table.
Table run_optimize(const ExperimentSpec& spec);

// One row per sweep distance; rows with no key carry rate 0 and a reason.
Table run_curve(const ExperimentSpec& spec);

// Paired sweep (single vs double scanning, or 4- vs 3-intensity) with an
// improvement-ratio column.
Table run_compare(const ExperimentSpec& spec);

}  // namespace mdiqkd
