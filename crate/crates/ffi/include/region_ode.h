#ifndef REGION_ODE_H
#define REGION_ODE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RodeStatus {
  RODE_STATUS_OK = 0,
  RODE_STATUS_NULL_POINTER = 1,
  /**
   * Bad UTF-8, out-of-range index or mismatched buffer length.
   */
  RODE_STATUS_INVALID_ARGUMENT = 2,
  RODE_STATUS_DIMENSION = 3,
  RODE_STATUS_NON_FINITE_INPUT = 4,
  RODE_STATUS_EVALUATION = 5,
  RODE_STATUS_USAGE = 6,
  RODE_STATUS_CONSTRUCTION = 7,
  RODE_STATUS_INCONSISTENT_PAIR = 8,
  RODE_STATUS_EVENT_LOCALIZATION = 9,
  RODE_STATUS_NON_FINITE_STATE = 10,
  RODE_STATUS_SCENARIO = 11,
  RODE_STATUS_IO = 12,
  /**
   * A Rust panic was caught at the boundary.
   */
  RODE_STATUS_PANIC = 13,
} RodeStatus;

typedef enum RodeChecker {
  RODE_CHECKER_REGION = 0,
  RODE_CHECKER_TRANSVERSALITY = 1,
  RODE_CHECKER_CLASSIFY = 2,
  RODE_CHECKER_LOWER = 3,
  RODE_CHECKER_UPPER = 4,
} RodeChecker;

/**
 * Result of a single checker.
 */
typedef struct RodeCheck RodeCheck;

/**
 * Result of a full run: report and trajectory.
 */
typedef struct RodeRun RodeRun;

/**
 * Parsed scenario.
 */
typedef struct RodeScenario RodeScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *rode_last_error(void);

/**
 * Library version as a static string.
 */
const char *rode_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void rode_string_free(char *s);

/**
 * Load a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RodeStatus rode_scenario_load(const char *path, struct RodeScenario **out);

/**
 * Parse scenario text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum RodeStatus rode_scenario_parse(const char *toml, struct RodeScenario **out);

/**
 * Set one numeric parameter (`alpha`, `step`, `seed`, ...). The scenario is
 * left unchanged on failure.
 *
 * # Safety
 * `scenario` must be a live handle; `name` a NUL-terminated string.
 */
enum RodeStatus rode_scenario_set_param(struct RodeScenario *scenario,
                                        const char *name,
                                        double value);

/**
 * Canonical scenario text; free with [`rode_string_free`].
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_scenario_canonical(const struct RodeScenario *scenario, char **out);

/**
 * # Safety
 * `scenario` must be null or a live handle, freed once.
 */
void rode_scenario_free(struct RodeScenario *scenario);

/**
 * Region check, transversality, integration and certificates. A run whose
 * certificate fails still returns `RODE_STATUS_OK`; query
 * [`rode_run_passed`].
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_run(const struct RodeScenario *scenario, struct RodeRun **out);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_run_passed(const struct RodeRun *run, bool *out);

/**
 * Number of stored grid points.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_run_len(const struct RodeRun *run, size_t *out);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_run_dim(const struct RodeRun *run, size_t *out);

/**
 * Copy grid point `index` into `t` and `x[0..x_len]`; `x_len` must equal
 * the dimension.
 *
 * # Safety
 * `run` must be a live handle, `t` writable and `x` valid for `x_len` writes.
 */
enum RodeStatus rode_run_state(const struct RodeRun *run,
                               size_t index,
                               double *t,
                               double *x,
                               size_t x_len);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_run_event_count(const struct RodeRun *run, size_t *out);

/**
 * Run report as TOML; free with [`rode_string_free`].
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_run_report(const struct RodeRun *run, char **out);

/**
 * Write `trajectory.csv`, `events.toml` and `report.toml` under `dir`.
 *
 * # Safety
 * `run` must be a live handle; `dir` a NUL-terminated string.
 */
enum RodeStatus rode_run_write(const struct RodeRun *run, const char *dir);

/**
 * # Safety
 * `run` must be null or a live handle, freed once.
 */
void rode_run_free(struct RodeRun *run);

/**
 * Run one checker.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_check(const struct RodeScenario *scenario,
                           enum RodeChecker which,
                           struct RodeCheck **out);

/**
 * # Safety
 * `check` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_check_passed(const struct RodeCheck *check, bool *out);

/**
 * Worst sampled value of the checked condition.
 *
 * # Safety
 * `check` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_check_worst(const struct RodeCheck *check, double *out);

/**
 * Checker report as TOML; free with [`rode_string_free`].
 *
 * # Safety
 * `check` must be a live handle; `out` must be writable.
 */
enum RodeStatus rode_check_report(const struct RodeCheck *check, char **out);

/**
 * # Safety
 * `check` must be null or a live handle, freed once.
 */
void rode_check_free(struct RodeCheck *check);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGION_ODE_H */
