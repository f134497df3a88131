#ifndef SHEARSTAB_H
#define SHEARSTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsShearKind {
  SS_SHEAR_KIND_TANH = 0,
  SS_SHEAR_KIND_COUETTE = 1,
} SsShearKind;

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_ARGUMENT = 2,
  SS_STATUS_ALPHA_OUT_OF_RANGE = 3,
  SS_STATUS_NOT_FRIEDLANDER = 4,
  SS_STATUS_NON_CONTRACTIVE = 5,
  SS_STATUS_TOLERANCE_NOT_REACHED = 6,
  SS_STATUS_ZERO_ON_CONTOUR = 7,
  SS_STATUS_REFINEMENT_EXHAUSTED = 8,
  SS_STATUS_NO_ZERO_FOUND = 9,
  SS_STATUS_NOT_A_ZERO = 10,
  SS_STATUS_NO_GROWTH = 11,
  SS_STATUS_CFL_VIOLATION = 12,
  SS_STATUS_NO_BLOWUP_WITHIN_BUDGET = 13,
  SS_STATUS_INCOMPATIBLE_EPS = 14,
  SS_STATUS_BUFFER_TOO_SMALL = 15,
  SS_STATUS_PANIC = 99,
} SsStatus;

// Stratified equilibrium `(U_s, ρ_s)`.
typedef struct SsEquilibrium SsEquilibrium;

// Growing mode on a uniform grid of `[-1, 1]`.
typedef struct SsMode SsMode;

// Nonlinear run started from a perturbed equilibrium.
typedef struct SsSimulation SsSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the message of the last failed call on this thread into `buf`,
// NUL-terminated and truncated to `len`. Returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t ss_last_error_message(char *buf, size_t len);

// Friedlander equilibrium with density `ρ_s` built from `U_s` and `alpha ∈ (1/2, 1]`.
//
// # Safety
// `out` must be a valid pointer.
enum SsStatus ss_equilibrium_friedlander(enum SsShearKind kind,
                                         double beta,
                                         double alpha,
                                         struct SsEquilibrium **out);

// Equilibrium with linear density `ρ_s(z) = gradient · z`.
//
// # Safety
// `out` must be a valid pointer.
enum SsStatus ss_equilibrium_linear(enum SsShearKind kind,
                                    double beta,
                                    double gradient,
                                    struct SsEquilibrium **out);

// # Safety
// `eq` must be null or a handle from `ss_equilibrium_*` not yet freed.
void ss_equilibrium_free(struct SsEquilibrium *eq);

// Minimum of the Richardson number over the channel.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_miles_howard(const struct SsEquilibrium *eq,
                              double *min_ri,
                              double *argmin_z,
                              bool *satisfied);

// Winding number of the homogeneous Nyquist function around the half disk
// `{eps ≤ Im c, |c| ≤ radius}`. A non-positive `radius` selects the exclusion radius.
//
// # Safety
// `winding` must be a valid pointer.
enum SsStatus ss_nyquist_winding(double beta, double eps, double radius, int64_t *winding);

// Dispersion function at phase speed `c`, `Im c > 0`.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_dispersion_eval(const struct SsEquilibrium *eq,
                                 double kappa,
                                 double c_re,
                                 double c_im,
                                 double *out_re,
                                 double *out_im);

// Fastest-growing zero with `Im c ≥ eps_floor` inside the exclusion radius.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_top_zero(const struct SsEquilibrium *eq,
                          double kappa,
                          double eps_floor,
                          double tol,
                          double *c_re,
                          double *c_im);

// Dominant growth rate of the linearized operator for wavenumber `k`;
// hydrostatic when `kappa == 0`.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_dominant_growth(const struct SsEquilibrium *eq,
                                 double k,
                                 double kappa,
                                 size_t nz,
                                 uint64_t seed,
                                 double *rate);

// Mode `(φ, r, w)` for a zero `c` of the dispersion function.
//
// # Safety
// `eq` and `out` must be valid pointers.
enum SsStatus ss_mode_new(const struct SsEquilibrium *eq,
                          int64_t k,
                          double kappa,
                          double c_re,
                          double c_im,
                          size_t nz,
                          struct SsMode **out);

// # Safety
// `mode` must be null or a handle from `ss_mode_new` not yet freed.
void ss_mode_free(struct SsMode *mode);

// Number of grid points of the mode; 0 for a null handle.
//
// # Safety
// `mode` must be null or a live handle.
size_t ss_mode_len(const struct SsMode *mode);

// Copies `z` and the stream function `φ` into caller buffers of length `len`.
//
// # Safety
// Each buffer must hold `len` doubles.
enum SsStatus ss_mode_phi(const struct SsMode *mode,
                          double *z,
                          double *phi_re,
                          double *phi_im,
                          size_t len);

// Residual of the mode equation and the wall defect.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_mode_residual(const struct SsMode *mode,
                               const struct SsEquilibrium *eq,
                               double *equation,
                               double *walls);

// Equilibrium plus `delta` times the mode on an `nx × nz` grid with torus scale `m_scale`.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_simulation_new(const struct SsEquilibrium *eq,
                                const struct SsMode *mode,
                                double delta,
                                size_t nx,
                                double m_scale,
                                struct SsSimulation **out);

// # Safety
// `sim` must be null or a handle from `ss_simulation_new` not yet freed.
void ss_simulation_free(struct SsSimulation *sim);

// Advances `steps` RK4 steps of size `dt`. Stops at the first CFL violation.
//
// # Safety
// `sim` must be a live handle.
enum SsStatus ss_simulation_step(struct SsSimulation *sim, double dt, size_t steps);

// Current time and `L²` distance from the equilibrium.
//
// # Safety
// All pointers must be valid.
enum SsStatus ss_simulation_state(const struct SsSimulation *sim, double *t, double *deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHEARSTAB_H */
