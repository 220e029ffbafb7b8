#ifndef LEAFSHAP_H
#define LEAFSHAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes; the numbering follows the command-line exit codes.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  /*
   Unexpected failure, including a caught panic.
   */
  LS_STATUS_INTERNAL = 1,
  /*
   Bad argument, unknown estimator or algorithm, missing file.
   */
  LS_STATUS_CONFIG = 2,
  /*
   Malformed model or data, or mismatched dimensions.
   */
  LS_STATUS_VALIDATION = 3,
  /*
   The estimator is undefined at a query row.
   */
  LS_STATUS_DEGENERATE = 4,
  /*
   A required pointer was null.
   */
  LS_STATUS_NULL_POINTER = 6,
} LsStatus;

/*
 A loaded model with its reference data.
 */
typedef struct LsExplainer LsExplainer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads a model JSON and, optionally, a CSV dataset with its schema file.

 `data_path` and `schema_path` may both be null, which allows only the
 `shap_path` estimator. On success `*out` owns a handle to release with
 [`ls_explainer_free`].

 # Safety
 Path arguments must be null or NUL-terminated strings; `out` must be
 valid for writes.
 */
enum LsStatus ls_explainer_load(const char *model_path,
                                const char *data_path,
                                const char *schema_path,
                                struct LsExplainer **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `handle` must come from [`ls_explainer_load`] and not be freed twice.
 */
void ls_explainer_free(struct LsExplainer *handle);

/*
 Number of model columns a query row must have; 0 for a null handle.

 # Safety
 `handle` must be null or a live handle.
 */
size_t ls_explainer_n_columns(const struct LsExplainer *handle);

/*
 Number of attributions per row; 0 for a null handle.

 # Safety
 `handle` must be null or a live handle.
 */
size_t ls_explainer_n_players(const struct LsExplainer *handle);

/*
 Explains `n_rows` row-major query rows of `n_cols` values each.

 `estimator` is one of `shap_path`, `discrete`, `leaf`, `leaf_raw` and
 `algorithm` one of `brute_force`, `multi_games`, `tree_shap`. Writes
 `n_rows * n_players` attributions to `phi_out` and, when not null, one base
 value per row to `base_out`. With `strict` nonzero rows are evaluated in
 order on the calling thread. When a row fails and `failed_row` is not
 null, its index is stored there.

 # Safety
 `rows` must hold `n_rows * n_cols` doubles, `phi_out` room for
 `n_rows * n_players` and `base_out`, if given, room for `n_rows`.
 */
enum LsStatus ls_explain(const struct LsExplainer *handle,
                         const char *estimator,
                         const char *algorithm,
                         const double *rows,
                         size_t n_rows,
                         size_t n_cols,
                         int32_t strict,
                         double *phi_out,
                         double *base_out,
                         size_t *failed_row);

/*
 Message of the last failure on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *ls_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ls_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEAFSHAP_H */
