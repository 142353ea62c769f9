#ifndef SHCGM_H
#define SHCGM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ShcgmStatus {
  SHCGM_STATUS_OK = 0,
  SHCGM_STATUS_NULL_POINTER = 1,
  SHCGM_STATUS_INVALID_UTF8 = 2,
  SHCGM_STATUS_PARSE = 3,
  SHCGM_STATUS_CONFIG = 4,
  SHCGM_STATUS_INVALID_PARAMETER = 5,
  SHCGM_STATUS_DIMENSION_MISMATCH = 6,
  SHCGM_STATUS_NOT_CONVERGED = 7,
  SHCGM_STATUS_CONTRACT = 8,
  SHCGM_STATUS_IO = 9,
  SHCGM_STATUS_OUT_OF_RANGE = 10,
  SHCGM_STATUS_PANIC = 11,
} ShcgmStatus;

// A parsed run configuration.
typedef struct ShcgmConfig ShcgmConfig;

// The trace and final iterate of a finished run.
typedef struct ShcgmRun ShcgmRun;

// One trace row. Columns a problem does not report hold NaN.
typedef struct ShcgmRecord {
  uint64_t k;
  double objective;
  double residual;
  double feasibility;
  double estimator_mse;
  double beta_k;
  double wall_time_ms;
} ShcgmRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *shcgm_last_error(void);

// Library version as a static NUL-terminated string.
const char *shcgm_version(void);

// Parses `key = value` config text into a new handle written to `out`.
//
// # Safety
// `text` must be NUL-terminated and `out` must be writable.
enum ShcgmStatus shcgm_config_parse(const char *text, struct ShcgmConfig **out);

// # Safety
// `config` must come from [`shcgm_config_parse`] or be NULL.
void shcgm_config_free(struct ShcgmConfig *config);

// # Safety
// `config` must be a live handle.
enum ShcgmStatus shcgm_config_set_iterations(struct ShcgmConfig *config, uint64_t iterations);

// # Safety
// `config` must be a live handle.
enum ShcgmStatus shcgm_config_set_seed(struct ShcgmConfig *config, uint64_t seed);

// Writes the canonical text of `config` into `buf` (capacity `len`,
// NUL-terminated) and the full length without the NUL into `needed`.
// A short buffer yields `OutOfRange` and leaves `buf` untouched.
//
// # Safety
// `buf` must hold `len` bytes (it may be NULL when `len` is 0); `needed`
// must be writable or NULL.
enum ShcgmStatus shcgm_config_serialize(const struct ShcgmConfig *config,
                                        char *buf,
                                        size_t len,
                                        size_t *needed);

// Runs `config` in memory and stores the trace and final iterate in a new
// handle written to `out`. No file is written.
//
// # Safety
// `config` must be a live handle and `out` writable.
enum ShcgmStatus shcgm_run(const struct ShcgmConfig *config, struct ShcgmRun **out);

// Runs `config` like the command line does, streaming the CSV trace to the
// config's `output` path (or the default name), and writes the number of
// rows to `rows` when it is not NULL.
//
// # Safety
// `config` must be a live handle; `rows` must be writable or NULL.
enum ShcgmStatus shcgm_run_to_csv(const struct ShcgmConfig *config, size_t *rows);

// # Safety
// `run` must come from [`shcgm_run`] or be NULL.
void shcgm_run_free(struct ShcgmRun *run);

// Number of trace records, 0 for NULL.
//
// # Safety
// `run` must be a live handle or NULL.
size_t shcgm_run_trace_len(const struct ShcgmRun *run);

// # Safety
// `run` must be a live handle and `out` writable.
enum ShcgmStatus shcgm_run_record(const struct ShcgmRun *run,
                                  size_t index,
                                  struct ShcgmRecord *out);

// Length of the final iterate, 0 for NULL.
//
// # Safety
// `run` must be a live handle or NULL.
size_t shcgm_run_solution_len(const struct ShcgmRun *run);

// Copies the final iterate into `buf`, which must hold at least
// [`shcgm_run_solution_len`] values.
//
// # Safety
// `run` must be a live handle and `buf` must hold `len` doubles.
enum ShcgmStatus shcgm_run_solution(const struct ShcgmRun *run, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHCGM_H */
