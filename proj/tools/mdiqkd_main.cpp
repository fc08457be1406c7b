// Command-line driver over the shared-library C API.

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdiqkd.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoKey = 3;

struct CommonArgs {
  std::string config;
  std::string out = "-";
  bool json = false;
  bool quiet = false;
  long long seed = -1;
  int threads = -1;
  std::string grid;
  std::string mode;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool long_running) {
  cmd->add_option("-c,--config", args->config, "experiment TOML file")
      ->required();
  cmd->add_option("-o,--out", args->out, "output path ('-' for stdout)");
  cmd->add_flag("--json", args->json, "emit JSON instead of CSV");
  cmd->add_option("--seed", args->seed, "RNG seed override");
  cmd->add_option("--threads", args->threads, "worker thread budget");
  cmd->add_option("--grid", args->grid,
                  "scan grid override: H, HxM or HxM+R");
  cmd->add_option("--mode", args->mode,
                  "analysis mode tokens, e.g. double,spo or single,none,3int");
  if (long_running)
    cmd->add_flag("-q,--quiet", args->quiet, "suppress progress output");
  else
    args->quiet = true;
}

struct ExperimentHandle {
  mdiqkd_experiment_t* ptr = nullptr;
  ~ExperimentHandle() { mdiqkd_experiment_close(ptr); }
};

struct TableHandle {
  mdiqkd_table_t* ptr = nullptr;
  ~TableHandle() { mdiqkd_table_free(ptr); }
};

int fail(mdiqkd_status_t status) {
  std::fprintf(stderr, "mdiqkd: %s\n", mdiqkd_last_error());
  return status == MDIQKD_ERROR_CONFIG ? kExitConfig : kExitFailure;
}

int apply_override(mdiqkd_experiment_t* experiment, const std::string& key,
                   const std::string& value) {
  const mdiqkd_status_t status =
      mdiqkd_experiment_override(experiment, key.c_str(), value.c_str());
  return status == MDIQKD_OK ? kExitOk : fail(status);
}

int apply_mode_tokens(mdiqkd_experiment_t* experiment,
                      const std::string& tokens) {
  std::string token;
  std::vector<std::string> parts;
  for (char c : tokens + ",") {
    if (c == ',') {
      if (!token.empty()) parts.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  for (const auto& part : parts) {
    int rc = kExitOk;
    if (part == "single" || part == "double")
      rc = apply_override(experiment, "analysis.scan", "\"" + part + "\"");
    else if (part == "spo" || part == "apo" || part == "none")
      rc = apply_override(experiment, "analysis.optimize", "\"" + part + "\"");
    else if (part == "3int")
      rc = apply_override(experiment, "analysis.three_intensity", "true");
    else if (part == "4int")
      rc = apply_override(experiment, "analysis.three_intensity", "false");
    else {
      std::fprintf(stderr, "mdiqkd: unknown mode token '%s'\n", part.c_str());
      return kExitConfig;
    }
    if (rc != kExitOk) return rc;
  }
  return kExitOk;
}

int apply_grid(mdiqkd_experiment_t* experiment, const std::string& grid) {
  long h = 0, m = 0, r = -1;
  char extra = 0;
  if (std::sscanf(grid.c_str(), "%ldx%ld+%ld%c", &h, &m, &r, &extra) == 3) {
  } else if (std::sscanf(grid.c_str(), "%ldx%ld%c", &h, &m, &extra) == 2) {
  } else if (std::sscanf(grid.c_str(), "%ld%c", &h, &extra) == 1) {
    m = h;
  } else {
    std::fprintf(stderr, "mdiqkd: --grid wants H, HxM or HxM+R, got '%s'\n",
                 grid.c_str());
    return kExitConfig;
  }
  int rc = apply_override(experiment, "scan.grid_h", std::to_string(h));
  if (rc == kExitOk)
    rc = apply_override(experiment, "scan.grid_m", std::to_string(m));
  if (rc == kExitOk && r >= 0)
    rc = apply_override(experiment, "scan.refine_rounds", std::to_string(r));
  return rc;
}

int open_experiment(const CommonArgs& args, ExperimentHandle* handle) {
  const mdiqkd_status_t status =
      mdiqkd_experiment_open(args.config.c_str(), &handle->ptr);
  if (status != MDIQKD_OK) return fail(status);
  int rc = kExitOk;
  if (args.seed >= 0) {
    rc = apply_override(handle->ptr, "optimizer.seed",
                        std::to_string(args.seed));
    if (rc == kExitOk)
      rc = apply_override(handle->ptr, "runtime.seed",
                          std::to_string(args.seed));
  }
  if (rc == kExitOk && args.threads >= 0)
    rc = apply_override(handle->ptr, "runtime.threads",
                        std::to_string(args.threads));
  if (rc == kExitOk && !args.grid.empty())
    rc = apply_grid(handle->ptr, args.grid);
  if (rc == kExitOk && !args.mode.empty())
    rc = apply_mode_tokens(handle->ptr, args.mode);
  if (rc == kExitOk && !args.quiet)
    rc = apply_override(handle->ptr, "runtime.progress", "true");
  return rc;
}

int emit(const TableHandle& table, const CommonArgs& args) {
  if (args.json) {
    char* json = mdiqkd_table_to_json(table.ptr);
    if (!json) {
      std::fprintf(stderr, "mdiqkd: JSON serialization failed\n");
      return kExitFailure;
    }
    if (args.out == "-") {
      std::fputs(json, stdout);
      std::fputc('\n', stdout);
    } else {
      std::FILE* f = std::fopen(args.out.c_str(), "w");
      if (!f) {
        std::fprintf(stderr, "mdiqkd: cannot open '%s'\n", args.out.c_str());
        mdiqkd_string_free(json);
        return kExitFailure;
      }
      std::fputs(json, f);
      std::fputc('\n', f);
      std::fclose(f);
    }
    mdiqkd_string_free(json);
    return kExitOk;
  }
  const mdiqkd_status_t status =
      mdiqkd_table_write_csv(table.ptr, args.out.c_str());
  return status == MDIQKD_OK ? kExitOk : fail(status);
}

// Exit 3 when an analysis produced no key anywhere (all rate columns zero).
int key_exit_code(const TableHandle& table) {
  const size_t columns = mdiqkd_table_columns(table.ptr);
  const size_t rows = mdiqkd_table_rows(table.ptr);
  bool saw_rate_column = false;
  for (size_t c = 0; c < columns; ++c) {
    const char* name = mdiqkd_table_column_name(table.ptr, c);
    if (!name) continue;
    const std::string column = name;
    if (column != "rate" && column != "a_rate" && column != "b_rate") continue;
    saw_rate_column = true;
    for (size_t r = 0; r < rows; ++r) {
      double value = 0.0;
      if (mdiqkd_table_number(table.ptr, r, c, &value) == MDIQKD_OK &&
          value > 0.0)
        return kExitOk;
    }
  }
  return saw_rate_column ? kExitNoKey : kExitOk;
}

using Runner = mdiqkd_status_t (*)(const mdiqkd_experiment_t*,
                                   mdiqkd_table_t**);

int run_command(const CommonArgs& args, Runner runner, bool check_key) {
  ExperimentHandle experiment;
  int rc = open_experiment(args, &experiment);
  if (rc != kExitOk) return rc;
  TableHandle table;
  const mdiqkd_status_t status = runner(experiment.ptr, &table.ptr);
  if (status != MDIQKD_OK) return fail(status);
  rc = emit(table, args);
  if (rc != kExitOk) return rc;
  return check_key ? key_exit_code(table) : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-key security analysis for 4-intensity MDI-QKD"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mdiqkd_version());

  CommonArgs simulate_args, estimate_args, optimize_args, curve_args,
      compare_args;
  std::string counts_path;
  bool poisson = false;

  CLI::App* simulate =
      app.add_subcommand("simulate", "synthesize counts from the channel model");
  add_common(simulate, &simulate_args, false);
  simulate->add_flag("--poisson", poisson,
                     "sample integer counts instead of expectations");

  CLI::App* estimate =
      app.add_subcommand("estimate", "analyze a measured counts file");
  add_common(estimate, &estimate_args, false);
  estimate->add_option("--counts", counts_path, "counts CSV file")->required();

  CLI::App* optimize =
      app.add_subcommand("optimize", "optimize the key rate at one distance");
  add_common(optimize, &optimize_args, true);

  CLI::App* curve = app.add_subcommand("curve", "rate-vs-distance sweep");
  add_common(curve, &curve_args, true);

  CLI::App* compare =
      app.add_subcommand("compare", "paired sweep with improvement ratios");
  add_common(compare, &compare_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (simulate->parsed()) {
    if (poisson) {
      ExperimentHandle experiment;
      int rc = open_experiment(simulate_args, &experiment);
      if (rc != kExitOk) return rc;
      rc = apply_override(experiment.ptr, "runtime.poisson_sampling", "true");
      if (rc != kExitOk) return rc;
      TableHandle table;
      const mdiqkd_status_t status =
          mdiqkd_run_simulate(experiment.ptr, &table.ptr);
      if (status != MDIQKD_OK) return fail(status);
      return emit(table, simulate_args);
    }
    return run_command(simulate_args, mdiqkd_run_simulate, false);
  }
  if (estimate->parsed()) {
    ExperimentHandle experiment;
    int rc = open_experiment(estimate_args, &experiment);
    if (rc != kExitOk) return rc;
    TableHandle table;
    const mdiqkd_status_t status =
        mdiqkd_run_estimate(experiment.ptr, counts_path.c_str(), &table.ptr);
    if (status != MDIQKD_OK) return fail(status);
    rc = emit(table, estimate_args);
    if (rc != kExitOk) return rc;
    return key_exit_code(table);
  }
  if (optimize->parsed())
    return run_command(optimize_args, mdiqkd_run_optimize, true);
  if (curve->parsed()) return run_command(curve_args, mdiqkd_run_curve, true);
  if (compare->parsed())
    return run_command(compare_args, mdiqkd_run_compare, true);
  return kExitConfig;
}
