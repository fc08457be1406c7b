#include "mdiqkd.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "config.hpp"
#include "experiment.hpp"
#include "table.hpp"

struct mdiqkd_experiment_t {
  mdiqkd::TomlDoc doc;
};

struct mdiqkd_table_t {
  mdiqkd::Table table;
  // Cell text needs stable storage across calls.
  mutable std::string scratch;
};

namespace {

thread_local std::string g_last_error = "no error";

mdiqkd_status_t set_error(mdiqkd_status_t status, const std::string& message) {
  g_last_error = message;
  return status;
}

mdiqkd_status_t run_failure(const std::exception& e) {
  if (dynamic_cast<const mdiqkd::ConfigError*>(&e))
    return set_error(MDIQKD_ERROR_CONFIG, e.what());
  if (dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::domain_error*>(&e))
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, e.what());
  return set_error(MDIQKD_ERROR_INTERNAL, e.what());
}

template <typename Fn>
mdiqkd_status_t run_table(const mdiqkd_experiment_t* experiment,
                          mdiqkd_table_t** out, const Fn& fn) {
  if (!experiment || !out)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    const mdiqkd::ExperimentSpec spec =
        mdiqkd::load_experiment_spec(experiment->doc);
    auto table = std::make_unique<mdiqkd_table_t>(
        mdiqkd_table_t{fn(spec), std::string()});
    *out = table.release();
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return run_failure(e);
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* mdiqkd_version(void) { return "1.0.0"; }

const char* mdiqkd_last_error(void) { return g_last_error.c_str(); }

mdiqkd_status_t mdiqkd_experiment_open(const char* toml_path,
                                       mdiqkd_experiment_t** out) {
  if (!toml_path || !out)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    auto experiment = std::make_unique<mdiqkd_experiment_t>();
    experiment->doc = mdiqkd::TomlDoc::parse_file(toml_path);
    // Surface malformed specs at open time, not first use.
    (void)mdiqkd::load_experiment_spec(experiment->doc);
    *out = experiment.release();
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return set_error(MDIQKD_ERROR_CONFIG, e.what());
  }
}

mdiqkd_status_t mdiqkd_experiment_parse(const char* toml_text,
                                        mdiqkd_experiment_t** out) {
  if (!toml_text || !out)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    auto experiment = std::make_unique<mdiqkd_experiment_t>();
    experiment->doc = mdiqkd::TomlDoc::parse(toml_text);
    (void)mdiqkd::load_experiment_spec(experiment->doc);
    *out = experiment.release();
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return set_error(MDIQKD_ERROR_CONFIG, e.what());
  }
}

mdiqkd_status_t mdiqkd_experiment_override(mdiqkd_experiment_t* experiment,
                                           const char* key,
                                           const char* value) {
  if (!experiment || !key || !value)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  try {
    mdiqkd::TomlDoc doc = experiment->doc;
    doc.set(key, value);
    (void)mdiqkd::load_experiment_spec(doc);  // keep the doc always loadable
    experiment->doc = std::move(doc);
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return set_error(MDIQKD_ERROR_CONFIG, e.what());
  }
}

void mdiqkd_experiment_close(mdiqkd_experiment_t* experiment) {
  delete experiment;
}

mdiqkd_status_t mdiqkd_run_simulate(const mdiqkd_experiment_t* experiment,
                                    mdiqkd_table_t** out) {
  return run_table(experiment, out, [](const mdiqkd::ExperimentSpec& spec) {
    return mdiqkd::run_simulate(spec);
  });
}

mdiqkd_status_t mdiqkd_run_estimate(const mdiqkd_experiment_t* experiment,
                                    const char* counts_csv_path,
                                    mdiqkd_table_t** out) {
  if (!counts_csv_path)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null counts path");
  const std::string path = counts_csv_path;
  return run_table(experiment, out,
                   [&path](const mdiqkd::ExperimentSpec& spec) {
                     std::ifstream in(path);
                     if (!in)
                       throw std::invalid_argument(
                           "cannot open counts file '" + path + "'");
                     const mdiqkd::ObservedCounts counts =
                         mdiqkd::read_counts_csv(in);
                     return mdiqkd::run_estimate(spec, counts);
                   });
}

mdiqkd_status_t mdiqkd_run_optimize(const mdiqkd_experiment_t* experiment,
                                    mdiqkd_table_t** out) {
  return run_table(experiment, out, [](const mdiqkd::ExperimentSpec& spec) {
    return mdiqkd::run_optimize(spec);
  });
}

mdiqkd_status_t mdiqkd_run_curve(const mdiqkd_experiment_t* experiment,
                                 mdiqkd_table_t** out) {
  return run_table(experiment, out, [](const mdiqkd::ExperimentSpec& spec) {
    return mdiqkd::run_curve(spec);
  });
}

mdiqkd_status_t mdiqkd_run_compare(const mdiqkd_experiment_t* experiment,
                                   mdiqkd_table_t** out) {
  return run_table(experiment, out, [](const mdiqkd::ExperimentSpec& spec) {
    return mdiqkd::run_compare(spec);
  });
}

size_t mdiqkd_table_rows(const mdiqkd_table_t* table) {
  return table ? table->table.rows() : 0;
}

size_t mdiqkd_table_columns(const mdiqkd_table_t* table) {
  return table ? table->table.columns() : 0;
}

const char* mdiqkd_table_column_name(const mdiqkd_table_t* table, size_t col) {
  if (!table || col >= table->table.columns()) return nullptr;
  return table->table.column_name(col).c_str();
}

const char* mdiqkd_table_cell(const mdiqkd_table_t* table, size_t row,
                              size_t col) {
  if (!table || row >= table->table.rows() || col >= table->table.columns())
    return nullptr;
  table->scratch = table->table.text(row, col);
  return table->scratch.c_str();
}

mdiqkd_status_t mdiqkd_table_number(const mdiqkd_table_t* table, size_t row,
                                    size_t col, double* out) {
  if (!table || !out)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  try {
    *out = table->table.number(row, col);
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, e.what());
  }
}

mdiqkd_status_t mdiqkd_table_find_column(const mdiqkd_table_t* table,
                                         const char* name, size_t* out) {
  if (!table || !name || !out)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  try {
    *out = table->table.column_index(name);
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, e.what());
  }
}

mdiqkd_status_t mdiqkd_table_write_csv(const mdiqkd_table_t* table,
                                       const char* path) {
  if (!table || !path)
    return set_error(MDIQKD_ERROR_INVALID_ARGUMENT, "null argument");
  try {
    if (std::strcmp(path, "-") == 0) {
      table->table.write_csv(std::cout);
      std::cout.flush();
      return MDIQKD_OK;
    }
    std::ofstream out(path);
    if (!out)
      return set_error(MDIQKD_ERROR_IO,
                       std::string("cannot open '") + path + "' for writing");
    table->table.write_csv(out);
    if (!out)
      return set_error(MDIQKD_ERROR_IO,
                       std::string("failed writing '") + path + "'");
    return MDIQKD_OK;
  } catch (const std::exception& e) {
    return set_error(MDIQKD_ERROR_IO, e.what());
  }
}

char* mdiqkd_table_to_json(const mdiqkd_table_t* table) {
  if (!table) return nullptr;
  try {
    return dup_string(table->table.to_json());
  } catch (const std::exception&) {
    return nullptr;
  }
}

char* mdiqkd_table_to_csv_string(const mdiqkd_table_t* table) {
  if (!table) return nullptr;
  try {
    return dup_string(table->table.to_csv());
  } catch (const std::exception&) {
    return nullptr;
  }
}

void mdiqkd_string_free(char* text) { std::free(text); }

void mdiqkd_table_free(mdiqkd_table_t* table) { delete table; }

}  // extern "C"
