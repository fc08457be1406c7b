/* C interface of the MDI-QKD finite-key analysis engine.
 *
 * The engine is configured through a TOML experiment file (or string),
 * optionally adjusted with dotted-key overrides, and produces column-labelled
 * result tables. All functions return MDIQKD_OK on success; on failure the
 * thread-local message from mdiqkd_last_error() describes what went wrong.
 * Handles are opaque and single-owner; tables returned through out-pointers
 * must be released with mdiqkd_table_free().
 */
#ifndef MDIQKD_H
#define MDIQKD_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MDIQKD_OK = 0,
  MDIQKD_ERROR_INVALID_ARGUMENT = 1,
  MDIQKD_ERROR_CONFIG = 2,
  MDIQKD_ERROR_IO = 3,
  MDIQKD_ERROR_INTERNAL = 4
} mdiqkd_status_t;

typedef struct mdiqkd_experiment_t mdiqkd_experiment_t;
typedef struct mdiqkd_table_t mdiqkd_table_t;

const char* mdiqkd_version(void);

/* Thread-local message of the last failed call; never NULL. */
const char* mdiqkd_last_error(void);

mdiqkd_status_t mdiqkd_experiment_open(const char* toml_path,
                                       mdiqkd_experiment_t** out);
mdiqkd_status_t mdiqkd_experiment_parse(const char* toml_text,
                                        mdiqkd_experiment_t** out);
/* Dotted-key override, e.g. ("optimizer.seed", "7") or
 * ("analysis.scan", "\"single\""); bare words are treated as strings. */
mdiqkd_status_t mdiqkd_experiment_override(mdiqkd_experiment_t* experiment,
                                           const char* key, const char* value);
void mdiqkd_experiment_close(mdiqkd_experiment_t* experiment);

/* Synthesize counts for the configured single-run geometry
 * (a "name,value" table). */
mdiqkd_status_t mdiqkd_run_simulate(const mdiqkd_experiment_t* experiment,
                                    mdiqkd_table_t** out);
/* Analyze a measured counts file, bypassing the channel model. */
mdiqkd_status_t mdiqkd_run_estimate(const mdiqkd_experiment_t* experiment,
                                    const char* counts_csv_path,
                                    mdiqkd_table_t** out);
/* Optimize the key rate at the single-run geometry. */
mdiqkd_status_t mdiqkd_run_optimize(const mdiqkd_experiment_t* experiment,
                                    mdiqkd_table_t** out);
/* One optimized row per sweep distance. */
mdiqkd_status_t mdiqkd_run_curve(const mdiqkd_experiment_t* experiment,
                                 mdiqkd_table_t** out);
/* Paired sweep with improvement ratios. */
mdiqkd_status_t mdiqkd_run_compare(const mdiqkd_experiment_t* experiment,
                                   mdiqkd_table_t** out);

size_t mdiqkd_table_rows(const mdiqkd_table_t* table);
size_t mdiqkd_table_columns(const mdiqkd_table_t* table);
/* NULL when the index is out of range. */
const char* mdiqkd_table_column_name(const mdiqkd_table_t* table, size_t col);
/* Serialized cell text (numbers carry 17 significant digits); NULL when out
 * of range. The pointer stays valid until the table is freed. */
const char* mdiqkd_table_cell(const mdiqkd_table_t* table, size_t row,
                              size_t col);
/* Numeric cell value; fails for text cells. */
mdiqkd_status_t mdiqkd_table_number(const mdiqkd_table_t* table, size_t row,
                                    size_t col, double* out);
mdiqkd_status_t mdiqkd_table_find_column(const mdiqkd_table_t* table,
                                         const char* name, size_t* out);
/* Write CSV to a path, or to stdout when path is "-". */
mdiqkd_status_t mdiqkd_table_write_csv(const mdiqkd_table_t* table,
                                       const char* path);
/* JSON array of row objects; free with mdiqkd_string_free. */
char* mdiqkd_table_to_json(const mdiqkd_table_t* table);
char* mdiqkd_table_to_csv_string(const mdiqkd_table_t* table);
void mdiqkd_string_free(char* text);
void mdiqkd_table_free(mdiqkd_table_t* table);

#ifdef __cplusplus
}
#endif

#endif /* MDIQKD_H */
