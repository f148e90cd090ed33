#ifndef GAUSSYNC_H
#define GAUSSYNC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_PARAMS = 2,
  GS_STATUS_NO_UNIQUE_STEADY_STATE = 3,
  GS_STATUS_UNSTABLE = 4,
  GS_STATUS_SOLVER_FAILURE = 5,
  GS_STATUS_PHYSICALITY_LOST = 6,
  GS_STATUS_NOT_FOUND = 7,
  GS_STATUS_INDEX_OUT_OF_RANGE = 8,
  GS_STATUS_INTERNAL = 9,
} GsStatus;

typedef enum GsRegime {
  GS_REGIME_NORMAL = 0,
  GS_REGIME_EXCEPTIONAL_POINT = 1,
  GS_REGIME_SYNCHRONIZED = 2,
} GsRegime;

/**
 * Validated parameter set.
 */
typedef struct GsSystem GsSystem;

/**
 * Sampled covariance trajectory.
 */
typedef struct GsTrajectory GsTrajectory;

/**
 * Model parameters; see `gs_system_new`.
 */
typedef struct GsParams {
  double omega1;
  double omega2;
  double g;
  double gamma;
  double xi;
  double nbar1;
  double nbar2;
} GsParams;

typedef struct GsSpectrum {
  double re_lambda_plus;
  double im_lambda_plus;
  double re_lambda_minus;
  double im_lambda_minus;
  double gap_real;
  double gap_imag;
  enum GsRegime regime;
} GsSpectrum;

typedef struct GsInfoReport {
  double s2_a;
  double s2_b;
  double s2_ab;
  double i2;
  double j2;
  double d2;
  double d2_lower;
  double nu_plus;
  double nu_minus;
  /**
   * Measurement squeezing; infinite for homodyne.
   */
  double seed_r;
  double seed_phi;
  bool divergent;
} GsInfoReport;

/**
 * Initial displacements ⟨a₁⟩, ⟨a₂⟩ as (re, im) pairs.
 */
typedef struct GsInitial {
  double alpha1_re;
  double alpha1_im;
  double alpha2_re;
  double alpha2_im;
} GsInitial;

typedef struct GsSample {
  double t;
  double a1_re;
  double a1_im;
  double a2_re;
  double a2_im;
  double theta11;
  double theta22;
  double theta12_re;
  double theta12_im;
  double min_uncertainty_eig;
} GsSample;

/**
 * Library version as a static NUL-terminated string.
 */
const char *gs_version(void);

/**
 * Message of the last failed call on this thread; empty when none. Valid
 * until the next failing call on the same thread.
 */
const char *gs_last_error_message(void);

/**
 * Validate `params` and create a system handle in `*out`.
 *
 * # Safety
 * `params` must point to a valid `GsParams`; `out` must be writable.
 */
enum GsStatus gs_system_new(const struct GsParams *params, struct GsSystem **out);

/**
 * # Safety
 * `system` must come from `gs_system_new` and not be used afterwards. Null is ignored.
 */
void gs_system_free(struct GsSystem *system);

/**
 * Cross-relaxation rate γ₁₂.
 *
 * # Safety
 * `system` must be a live handle; `out` must be writable.
 */
enum GsStatus gs_gamma12(const struct GsSystem *system, double *out);

/**
 * Smallest ξ > 0 at which the decoupled eigenvalues coalesce. Returns
 * `GS_STATUS_NOT_FOUND` when there is none in (0, 1] or g ≠ 0.
 *
 * # Safety
 * `system` must be a live handle; `out` must be writable.
 */
enum GsStatus gs_critical_xi(const struct GsSystem *system, double *out);

/**
 * # Safety
 * `system` must be a live handle; `out` must be writable.
 */
enum GsStatus gs_eigenspectrum(const struct GsSystem *system, struct GsSpectrum *out);

/**
 * Stationary covariance over (a₁, a₁†, a₂, a₂†) as 16 complex entries in
 * row-major order, interleaved (re, im): `theta` must hold 32 doubles.
 * `residual` may be null.
 *
 * # Safety
 * `system` must be a live handle; `theta` must point to 32 writable doubles.
 */
enum GsStatus gs_steady_state(const struct GsSystem *system, double *theta, double *residual);

/**
 * Information measures of the stationary state.
 *
 * # Safety
 * `system` must be a live handle; `out` must be writable.
 */
enum GsStatus gs_info_report(const struct GsSystem *system, struct GsInfoReport *out);

/**
 * First moments at time `t`, written to `out` as ⟨a₁⟩, ⟨a₂⟩ (re, im) pairs.
 *
 * # Safety
 * `system` and `init` must be valid; `out` must be writable.
 */
enum GsStatus gs_propagate_moments(const struct GsSystem *system,
                                   const struct GsInitial *init,
                                   double t,
                                   struct GsInitial *out);

/**
 * Integrate moments and covariance from a vacuum covariance up to `t_end`.
 * `dt <= 0` selects 200 steps per period of ω₁. With `allow_unphysical`
 * false the run stops with `GS_STATUS_PHYSICALITY_LOST` on the first
 * unphysical sample.
 *
 * # Safety
 * `system` and `init` must be valid; `out` must be writable.
 */
enum GsStatus gs_trajectory_run(const struct GsSystem *system,
                                const struct GsInitial *init,
                                double dt,
                                double t_end,
                                size_t stride,
                                bool allow_unphysical,
                                struct GsTrajectory **out);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be a live handle or null.
 */
size_t gs_trajectory_len(const struct GsTrajectory *trajectory);

/**
 * # Safety
 * `trajectory` must be a live handle; `out` must be writable.
 */
enum GsStatus gs_trajectory_sample(const struct GsTrajectory *trajectory,
                                   size_t index,
                                   struct GsSample *out);

/**
 * # Safety
 * `trajectory` must come from `gs_trajectory_run` and not be used afterwards. Null is ignored.
 */
void gs_trajectory_free(struct GsTrajectory *trajectory);

#endif  /* GAUSSYNC_H */
