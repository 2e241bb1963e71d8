#ifndef DENSE_BLOCH_H
#define DENSE_BLOCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DbStatus {
  DB_STATUS_OK = 0,
  DB_STATUS_NULL_POINTER = 1,
  DB_STATUS_INVALID_ARGUMENT = 2,
  DB_STATUS_NUMERICAL = 3,
  DB_STATUS_OUT_OF_RANGE = 4,
  DB_STATUS_PANIC = 5,
} DbStatus;

typedef enum DbCollectiveMode {
  DB_COLLECTIVE_MODE_OFF = 0,
  DB_COLLECTIVE_MODE_EXPLICIT_APPROX = 1,
  DB_COLLECTIVE_MODE_FIXED_POINT = 2,
} DbCollectiveMode;

/**
 * Opaque list of stationary bistability points.
 */
typedef struct DbBranches DbBranches;

/**
 * Opaque population decay trajectory.
 */
typedef struct DbDecay DbDecay;

/**
 * Opaque dimensionless parameter set.
 */
typedef struct DbGroups DbGroups;

typedef struct DbDecaySample {
  double t;
  double rho_aa;
  double gamma;
  /**
   * NaN below the truncation floor.
   */
  double gamma_eff;
} DbDecaySample;

typedef struct DbEscapeRate {
  double numeric;
  /**
   * NaN when κ ≤ 1.
   */
  double asymptotic;
  double lambda_max;
} DbEscapeRate;

typedef struct DbBranchPoint {
  double omega;
  double rho_aa;
  double rho_ab_re;
  double rho_ab_im;
  double gamma;
  bool stable;
  size_t branch_id;
} DbBranchPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len`). Returns the full message length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t db_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *db_version(void);

/**
 * Groups of a Doppler gas from opacity `eta` and width ratio `g`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DbStatus db_groups_new(double eta, double g, struct DbGroups **out);

/**
 * # Safety
 * `groups` must come from [`db_groups_new`] or be null.
 */
void db_groups_free(struct DbGroups *groups);

/**
 * Line-center opacity κ and Doppler width Δ_D/γ.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_groups_get(const struct DbGroups *groups, double *kappa, double *doppler_width);

/**
 * Small-sample collective rate Γ(Δ)/γ for an incoherent state.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_rate_spectral(const struct DbGroups *groups,
                               double rho_aa,
                               double detuning,
                               double *out);

/**
 * Velocity-averaged small-sample rate Γ/γ.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_rate_averaged(const struct DbGroups *groups, double rho_aa, double *out);

/**
 * Integrates the population decay with default numerics.
 *
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_decay_run(const struct DbGroups *groups,
                           double rho_aa0,
                           double t_end,
                           size_t samples,
                           struct DbDecay **out);

/**
 * # Safety
 * `decay` must be valid.
 */
enum DbStatus db_decay_len(const struct DbDecay *decay, size_t *len);

/**
 * # Safety
 * `decay` must be valid.
 */
enum DbStatus db_decay_markov_violated(const struct DbDecay *decay, bool *flag);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_decay_get(const struct DbDecay *decay, size_t index, struct DbDecaySample *sample);

/**
 * # Safety
 * `decay` must come from [`db_decay_run`] or be null.
 */
void db_decay_free(struct DbDecay *decay);

/**
 * Fundamental-mode escape rate of the slab trapping kernel.
 *
 * # Safety
 * `out` must be valid.
 */
enum DbStatus db_holstein_escape_rate(double kappa,
                                      double half_thickness,
                                      size_t node_count,
                                      struct DbEscapeRate *out);

/**
 * Stationary points on `points` equally spaced Ω in `[omega_min, omega_max]`.
 *
 * # Safety
 * `out` must be valid.
 */
enum DbStatus db_bistability_branches(double cooperativity,
                                      double slab_parameter,
                                      double nonradiative_ratio,
                                      enum DbCollectiveMode mode,
                                      double omega_min,
                                      double omega_max,
                                      size_t points,
                                      struct DbBranches **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_branches_len(const struct DbBranches *branches, size_t *len);

/**
 * # Safety
 * Pointers must be valid.
 */
enum DbStatus db_branches_get(const struct DbBranches *branches,
                              size_t index,
                              struct DbBranchPoint *point);

/**
 * # Safety
 * `branches` must come from [`db_bistability_branches`] or be null.
 */
void db_branches_free(struct DbBranches *branches);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DENSE_BLOCH_H */
