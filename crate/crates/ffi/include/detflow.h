#ifndef DETFLOW_H
#define DETFLOW_H

/* Generated by cbindgen. Do not edit by hand. */

#include <stddef.h>
#include <stdint.h>

typedef enum DetflowAxis {
  DETFLOW_AXIS_ROWS = 0,
  DETFLOW_AXIS_COLUMNS = 1,
} DetflowAxis;

/**
 * Per-grid-point series stored on a trajectory.
 */
typedef enum DetflowChannel {
  DETFLOW_CHANNEL_TIMES = 0,
  DETFLOW_CHANNEL_DET_DIRECT = 1,
  DETFLOW_CHANNEL_DET_ODE = 2,
  DETFLOW_CHANNEL_CUM_TRACE = 3,
  DETFLOW_CHANNEL_EQ5 = 4,
  DETFLOW_CHANNEL_EQ6 = 5,
  DETFLOW_CHANNEL_EQ2 = 6,
  DETFLOW_CHANNEL_EQ4 = 7,
} DetflowChannel;

typedef enum DetflowStatus {
  DETFLOW_STATUS_OK = 0,
  DETFLOW_STATUS_NULL_POINTER = 1,
  DETFLOW_STATUS_INVALID_UTF8 = 2,
  DETFLOW_STATUS_PARSE = 3,
  DETFLOW_STATUS_VALIDATION = 4,
  DETFLOW_STATUS_DIMENSION = 5,
  DETFLOW_STATUS_NON_FINITE = 6,
  DETFLOW_STATUS_SINGULAR = 7,
  DETFLOW_STATUS_INTEGRATION = 8,
  DETFLOW_STATUS_IDENTITY = 9,
  DETFLOW_STATUS_NOT_APPLICABLE = 10,
  DETFLOW_STATUS_BUFFER_TOO_SMALL = 11,
  DETFLOW_STATUS_INDEX_OUT_OF_RANGE = 12,
  DETFLOW_STATUS_PANIC = 99,
} DetflowStatus;

/**
 * Opaque parsed and validated scenario.
 */
typedef struct DetflowScenario DetflowScenario;

/**
 * Opaque integrated trajectory with its evaluated identity series.
 */
typedef struct DetflowTrajectory DetflowTrajectory;

/**
 * Summary of a trajectory. Drift fields are `NaN` when the channel does
 * not apply; `first_noninvertible_time` is `NaN` when never reached.
 */
typedef struct DetflowDriftReport {
  size_t grid_points;
  size_t accepted_steps;
  size_t rejected_steps;
  size_t overflow_points;
  double max_rel_drift_eq5;
  double max_rel_drift_eq6;
  double max_rel_drift_detode;
  double max_rel_drift_eq2;
  double max_rel_drift_eq4;
  double worst_drift;
  double first_noninvertible_time;
} DetflowDriftReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *detflow_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *detflow_version(void);

/**
 * Parses and validates a scenario document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DetflowStatus detflow_scenario_from_json(const char *json, struct DetflowScenario **out);

/**
 * Matrix dimension of a scenario, or 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t detflow_scenario_dim(const struct DetflowScenario *scenario);

/**
 * Switches the scenario to fixed-step RK4 with step `h`.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum DetflowStatus detflow_scenario_set_rk4(struct DetflowScenario *scenario, double h);

/**
 * Switches the scenario to adaptive RKF45 with tolerance `tol`.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum DetflowStatus detflow_scenario_set_rkf45(struct DetflowScenario *scenario, double tol);

/**
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void detflow_scenario_free(struct DetflowScenario *scenario);

/**
 * Integrates a scenario and evaluates every determinant channel.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum DetflowStatus detflow_integrate(const struct DetflowScenario *scenario,
                                     struct DetflowTrajectory **out);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t detflow_trajectory_len(const struct DetflowTrajectory *traj);

/**
 * Matrix dimension, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t detflow_trajectory_dim(const struct DetflowTrajectory *traj);

/**
 * Copies one channel into `buf`, which must hold at least
 * `detflow_trajectory_len` values. Overflowed samples are written as
 * `+inf`. Points past the first non-invertible sample of `EQ6` are `NaN`.
 * Returns `NOT_APPLICABLE` when the channel was not computed for this
 * scenario.
 *
 * # Safety
 * `traj` must be a live handle and `buf` valid for `len` writes.
 */
enum DetflowStatus detflow_trajectory_channel(const struct DetflowTrajectory *traj,
                                              enum DetflowChannel channel,
                                              double *buf,
                                              size_t len);

/**
 * Copies the matrix at grid point `index` (row-major, `n * n` values).
 *
 * # Safety
 * `traj` must be a live handle and `buf` valid for `len` writes.
 */
enum DetflowStatus detflow_trajectory_matrix(const struct DetflowTrajectory *traj,
                                             size_t index,
                                             double *buf,
                                             size_t len);

/**
 * # Safety
 * `traj` must be a live handle and `out` a writable pointer.
 */
enum DetflowStatus detflow_trajectory_report(const struct DetflowTrajectory *traj,
                                             struct DetflowDriftReport *out);

/**
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void detflow_trajectory_free(struct DetflowTrajectory *traj);

/**
 * Parses, integrates and renders a scenario as CSV in one call. The
 * returned string must be released with [`detflow_string_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DetflowStatus detflow_run_csv(const char *json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void detflow_string_free(char *s);

/**
 * # Safety
 * `m` must point to `n * n` doubles and `out` be writable.
 */
enum DetflowStatus detflow_det(const double *m, size_t n, double *out);

/**
 * # Safety
 * `m` must point to `n * n` doubles and `out` be writable.
 */
enum DetflowStatus detflow_trace(const double *m, size_t n, double *out);

/**
 * Writes the inverse into `out` (`n * n` doubles). Fails with `SINGULAR`
 * when a pivot is negligible relative to the matrix scale.
 *
 * # Safety
 * `m` and `out` must each point to `n * n` doubles.
 */
enum DetflowStatus detflow_inverse(const double *m, size_t n, double *out);

/**
 * Writes the adjugate into `out` (`n * n` doubles). Defined for singular
 * matrices too.
 *
 * # Safety
 * `m` and `out` must each point to `n * n` doubles.
 */
enum DetflowStatus detflow_adjugate(const double *m, size_t n, double *out);

/**
 * Sum over `k` of `det(X)` with row (or column) `k` replaced by that of `F`.
 *
 * # Safety
 * `x` and `f` must each point to `n * n` doubles and `out` be writable.
 */
enum DetflowStatus detflow_replaced_det_sum(const double *x,
                                            const double *f,
                                            size_t n,
                                            enum DetflowAxis axis,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DETFLOW_H */
