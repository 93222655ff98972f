#ifndef VORTICAL_H
#define VORTICAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. `Ok` is zero.
 */
typedef enum {
  VORTICAL_STATUS_OK = 0,
  VORTICAL_STATUS_NULL_POINTER,
  VORTICAL_STATUS_INVALID_PARAMS,
  VORTICAL_STATUS_INVALID_ARGUMENT,
  VORTICAL_STATUS_UNKNOWN_PRESET,
  VORTICAL_STATUS_ZERO_ROTATION,
  VORTICAL_STATUS_COLLAPSED_STATE,
  VORTICAL_STATUS_OUT_OF_RANGE,
  VORTICAL_STATUS_NO_BRACKET,
  VORTICAL_STATUS_DEGENERATE_ORBIT,
  VORTICAL_STATUS_STEP_FAILURE,
  VORTICAL_STATUS_OTHER,
  VORTICAL_STATUS_PANIC,
} VorticalStatus;

typedef enum {
  VORTICAL_BRANCH_ONE,
  VORTICAL_BRANCH_TWO_AI,
  VORTICAL_BRANCH_TWO_AII,
  VORTICAL_BRANCH_TWO_B_BLOWUP,
  VORTICAL_BRANCH_TWO_B_GLOBAL,
  VORTICAL_BRANCH_THREE_A,
  VORTICAL_BRANCH_THREE_BI_GLOBAL,
  VORTICAL_BRANCH_THREE_BI_BLOWUP,
  VORTICAL_BRANCH_THREE_BII_GLOBAL,
  VORTICAL_BRANCH_THREE_BII_BLOWUP,
} VorticalBranch;

typedef enum {
  VORTICAL_REGIME_KIND_GLOBAL,
  VORTICAL_REGIME_KIND_TIME_PERIODIC,
  VORTICAL_REGIME_KIND_STEADY,
  VORTICAL_REGIME_KIND_FINITE_TIME_BLOWUP,
} VorticalRegimeKind;

/**
 * Validated parameter record.
 */
typedef struct VorticalParams VorticalParams;

/**
 * Integrated scale trajectory with dense output.
 */
typedef struct VorticalTrajectory VorticalTrajectory;

typedef struct {
  double gamma;
  /**
   * Pressure constant `K`.
   */
  double k;
  double xi;
  double lambda;
  double alpha;
  double a0;
  double a1;
} VorticalParamValues;

typedef struct {
  double t;
  double a;
  double adot;
} VorticalScaleState;

typedef struct {
  double rho;
  double u1;
  double u2;
  double p;
} VorticalFlowSample;

/**
 * Solver settings; `max_step` is unbounded when infinite.
 */
typedef struct {
  double rel_tol;
  double abs_tol;
  double max_step;
  double collapse_epsilon;
  /**
   * Time at which `a0` and `a1` hold.
   */
  double t0;
  double t_end;
} VorticalIntegrationConfig;

typedef struct {
  double t_start;
  double t_end;
  size_t nodes;
  /**
   * Max relative energy drift over the nodes.
   */
  double energy_drift;
  bool collapsed;
  /**
   * Collapse time and bracket width; NaN without collapse.
   */
  double t_star;
  double error_bar;
} VorticalTrajectorySummary;

/**
 * Fields that do not apply to `kind` are NaN.
 */
typedef struct {
  VorticalBranch branch;
  VorticalRegimeKind kind;
  double period;
  double a_eq;
  /**
   * Blowup time and its bracket, measured from the initial data.
   */
  double t_star;
  double t_lo;
  double t_hi;
  /**
   * Initial energy `E(0)`.
   */
  double energy;
} VorticalRegime;

typedef struct {
  double period;
  double error_estimate;
  double a_min;
  double a_max;
  /**
   * The lower turning point lies below the resolvable scale range and
   * `a_min` is the cutoff used instead.
   */
  bool truncated;
} VorticalPeriod;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Validate `values` and return a new handle in `*out`.
 *
 * # Safety
 * `values` and `out` are null or valid. Free the handle with
 * `vortical_params_free`.
 */
VorticalStatus vortical_params_new(const VorticalParamValues *values, VorticalParams **out);

/**
 * Check `values` without allocating.
 *
 * # Safety
 * `values` is null or valid.
 */
VorticalStatus vortical_params_validate(const VorticalParamValues *values);

/**
 * Handle for a named preset, e.g. `"periodic-demo"`.
 *
 * # Safety
 * `name` is null or a NUL-terminated string; `out` is null or valid.
 */
VorticalStatus vortical_params_from_preset(const char *name, VorticalParams **out);

/**
 * Copy the values held by a handle.
 *
 * # Safety
 * `params` is null or a live handle; `out` is null or valid.
 */
VorticalStatus vortical_params_values(const VorticalParams *params, VorticalParamValues *out);

/**
 * # Safety
 * `params` is null or a handle from this library, not yet freed.
 */
void vortical_params_free(VorticalParams *params);

/**
 * Density, velocity and pressure at `(x, y)` for the given scale state.
 *
 * # Safety
 * Pointers are null or valid.
 */
VorticalStatus vortical_eval_flow(const VorticalParams *params,
                                  const VorticalScaleState *state,
                                  double x,
                                  double y,
                                  VorticalFlowSample *out);

/**
 * Default solver settings for a run from `t = 0` to `t_end`.
 */
VorticalIntegrationConfig vortical_integration_config_default(double t_end);

/**
 * Integrate the scale equation; a collapse ends the run early and is
 * reported by `vortical_trajectory_summary`, not as an error.
 *
 * # Safety
 * Pointers are null or valid. Free the trajectory with
 * `vortical_trajectory_free`.
 */
VorticalStatus vortical_integrate(const VorticalParams *params,
                                  const VorticalIntegrationConfig *config,
                                  VorticalTrajectory **out);

/**
 * # Safety
 * `traj` is null or a handle from this library, not yet freed.
 */
void vortical_trajectory_free(VorticalTrajectory *traj);

/**
 * Dense-output state at `t`; `OutOfRange` outside the integrated span.
 *
 * # Safety
 * Pointers are null or valid.
 */
VorticalStatus vortical_trajectory_state_at(const VorticalTrajectory *traj,
                                            double t,
                                            VorticalScaleState *out);

/**
 * # Safety
 * Pointers are null or valid.
 */
VorticalStatus vortical_trajectory_summary(const VorticalTrajectory *traj,
                                           VorticalTrajectorySummary *out);

/**
 * Long-time regime of the initial data.
 *
 * # Safety
 * Pointers are null or valid.
 */
VorticalStatus vortical_classify(const VorticalParams *params, VorticalRegime *out);

/**
 * Period of a bound orbit by quadrature.
 *
 * # Safety
 * Pointers are null or valid.
 */
VorticalStatus vortical_period(const VorticalParams *params, VorticalPeriod *out);

/**
 * Static label such as `"2b-blowup"`.
 */
const char *vortical_branch_label(VorticalBranch branch);

/**
 * Static name such as `"DegenerateOrbit"`.
 */
const char *vortical_status_name(VorticalStatus status);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and return its full length in bytes, or 0
 * when the last call succeeded. A null `buf` only queries the length.
 *
 * # Safety
 * `buf` is null or valid for writes of `len` bytes.
 */
size_t vortical_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VORTICAL_H */
