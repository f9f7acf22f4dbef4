#ifndef SPARSEPLS_H
#define SPARSEPLS_H

/* C interface of the sparse partial-least-squares shared library.
 *
 * Conventions:
 *  - Every fallible call returns a status code; SPLS_OK means success.
 *  - On failure, spls_last_error() returns a message for the calling thread.
 *  - Objects returned through out-parameters are owned by the caller and
 *    released with the matching *_free call. Strings returned through
 *    out-parameters are released with spls_string_free.
 *  - Dense buffers are row-major.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spls_status {
  SPLS_OK = 0,
  SPLS_ERR_INVALID_ARGUMENT = 1,
  SPLS_ERR_PARSE = 2,
  SPLS_ERR_NUMERIC = 3,
  SPLS_ERR_IO = 4,
  SPLS_ERR_INTERNAL = 5
} spls_status;

typedef struct spls_dataset spls_dataset;
typedef struct spls_model spls_model;

/* Static storage; do not free. */
const char* spls_version(void);

/* Message of the calling thread's most recent failure; empty string if none.
 * Valid until the thread's next library call. */
const char* spls_last_error(void);

void spls_string_free(char* text);

/* ---- datasets ---- */

/* Load predictors and responses from csv files (optional subject labels,
 * one per line). */
spls_status spls_dataset_from_csv(const char* x_path, const char* y_path, int has_header,
                                  const char* subjects_path_or_null, spls_dataset** out);

/* Wrap caller-provided row-major buffers (copied). */
spls_status spls_dataset_from_dense(const double* x, const double* y, int64_t n, int64_t p,
                                    int64_t q, spls_dataset** out);

/* Draw one synthetic latent-block dataset (model_id in 1..4). */
spls_status spls_dataset_simulate(int model_id, int64_t n, int64_t p, uint64_t seed,
                                  spls_dataset** out);

spls_status spls_dataset_dims(const spls_dataset* data, int64_t* n, int64_t* p, int64_t* q);

/* Write predictors / responses / (when present) generating coefficients.
 * Null paths are skipped; beta_path fails if no coefficients are attached. */
spls_status spls_dataset_save_csv(const spls_dataset* data, const char* x_path_or_null,
                                  const char* y_path_or_null, const char* beta_path_or_null);

void spls_dataset_free(spls_dataset* data);

/* ---- models ---- */

/* method: "nipals" | "simpls" | "global_simpls" | "l1_spls".
 * options_json_or_null: JSON object with optional sections
 *   {"scale": bool, "admm": {...}, "l1": {...}} matching the config file. */
spls_status spls_fit(const spls_dataset* data, const char* method, int k, double lambda,
                     const char* options_json_or_null, spls_model** out);

spls_status spls_model_dims(const spls_model* model, int64_t* p, int64_t* q, int* k);

/* Number of predictors the fit kept. */
spls_status spls_model_selected_count(const spls_model* model, int64_t* count);

/* Predictions for a row-major n x p block; y_out must hold n * q doubles. */
spls_status spls_predict(const spls_model* model, const double* x, int64_t n, int64_t p,
                         double* y_out);

spls_status spls_model_to_json(const spls_model* model, char** out_text);
spls_status spls_model_from_json(const char* text, spls_model** out);

void spls_model_free(spls_model* model);

/* ---- selection and experiments (JSON-configured) ---- */

/* config_json: {"method": ..., "k_grid": [...], "lambda_grid": [...],
 *   "folds": int, "seed": int, "mse_mode": "mean"|"sum", "scale": bool,
 *   "threads": int, "admm": {...}, "l1": {...}}.
 * Empty lambda_grid uses the method's default grid ("lambda_points" sets its
 * size). Returns the cross-validation result as JSON. */
spls_status spls_cross_validate(const spls_dataset* data, const char* config_json,
                                char** out_json);

/* Full multi-trial protocol from an experiment config (see docs); returns the
 * report JSON and, when out_table is non-null, the text table. */
spls_status spls_experiment_run(const char* config_json, char** out_report_json,
                                char** out_table);

/* Per-variable selection counts across trials, as csv text. */
spls_status spls_selection_frequency_run(const char* config_json, char** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* SPARSEPLS_H */
