#ifndef GEOAUDIT_H
#define GEOAUDIT_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirrored into the generated header.
 */
typedef enum GeoauditStatus {
  GEOAUDIT_STATUS_OK = 0,
  GEOAUDIT_STATUS_INVALID_ARGUMENT = 1,
  GEOAUDIT_STATUS_DATA_ERROR = 2,
  GEOAUDIT_STATUS_NUMERIC_ERROR = 3,
  GEOAUDIT_STATUS_NULL_POINTER = 4,
} GeoauditStatus;

/**
 * Opaque dataset handle.
 */
typedef struct GeoauditDataset GeoauditDataset;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for the calling thread, or NULL if none. The pointer
 * stays valid until the next failing call on this thread; do not free it.
 */
const char *geoaudit_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *geoaudit_version(void);

/**
 * Generate the synthetic XOR-with-shortcut dataset.
 *
 * # Safety
 * `out` must be a valid pointer to a dataset handle slot.
 */
enum GeoauditStatus geoaudit_dataset_xor(uintptr_t n,
                                         double leak_rate,
                                         double noise_std,
                                         uint64_t seed,
                                         struct GeoauditDataset **out);

/**
 * Number of rows in a dataset, or -1 on NULL.
 */
int geoaudit_dataset_rows(const struct GeoauditDataset *dataset);

/**
 * Number of feature columns in a dataset, or -1 on NULL.
 */
int geoaudit_dataset_dim(const struct GeoauditDataset *dataset);

/**
 * Drop one named feature column, producing a new dataset handle.
 *
 * # Safety
 * `dataset` must be a live handle, `name` a NUL-terminated string and
 * `out` a valid slot.
 */
enum GeoauditStatus geoaudit_dataset_drop_feature(const struct GeoauditDataset *dataset,
                                                  const char *name,
                                                  struct GeoauditDataset **out);

/**
 * Release a dataset handle. NULL is a no-op.
 */
void geoaudit_dataset_free(struct GeoauditDataset *dataset);

/**
 * Train the linear probe on a dataset and return the audit report as a
 * JSON string (sorted keys, 6 significant digits).
 *
 * # Safety
 * `dataset` must be a live handle and `out_json` a valid slot; release the
 * string with `geoaudit_string_free`.
 */
enum GeoauditStatus geoaudit_audit_json(const struct GeoauditDataset *dataset,
                                        uint64_t seed,
                                        char **out_json);

/**
 * Run the full pipeline from a TOML configuration string; artifacts are
 * written to the configured output directory.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string.
 */
enum GeoauditStatus geoaudit_run_pipeline(const char *config_toml);

/**
 * Release a string returned by this library. NULL is a no-op.
 */
void geoaudit_string_free(char *text);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GEOAUDIT_H */
