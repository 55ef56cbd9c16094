#ifndef FADE_H
#define FADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FadeStatus {
  FADE_STATUS_OK = 0,
  /**
   * A check ran and failed (verification only).
   */
  FADE_STATUS_CHECK_FAILED = 1,
  FADE_STATUS_INVALID_ARGUMENT = 2,
  FADE_STATUS_CONFIG_ERROR = 3,
  FADE_STATUS_NON_CONVERGENCE = 4,
  FADE_STATUS_SANDWICH_VIOLATION = 5,
  FADE_STATUS_IO_ERROR = 6,
  FADE_STATUS_NULL_POINTER = 7,
  FADE_STATUS_PANIC = 8,
} FadeStatus;

/**
 * Opaque simulation handle.
 */
typedef struct FadeSimulation FadeSimulation;

/**
 * Exponents derived from `(m, d)`.
 */
typedef struct FadeExponents {
  double m;
  uint32_t d;
  double m_c;
  double m_star;
  double m_1;
  double m_0;
  double p_star;
  double p_of_m;
  double q_star;
} FadeExponents;

/**
 * Diagnostics at one stored time of a simulation.
 */
typedef struct FadeReport {
  double t;
  double entropy;
  double fisher;
  double e_lin;
  double i_lin;
  double rel_mass;
  double w_min;
  double w_max;
} FadeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated
 * to `len`). Returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t fade_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be null or point to writable memory for one `FadeExponents`.
 */
enum FadeStatus fade_exponents(double m, uint32_t d, struct FadeExponents *out);

/**
 * `V_D(r) = (D + (1-m)/(2m) r^2)^{-1/(1-m)}`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum FadeStatus fade_barenblatt_profile(double m, uint32_t d, double scale, double r, double *out);

/**
 * Closed-form Hardy-Poincaré constant for `d >= 5`, `m < m_*`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum FadeStatus fade_exact_gap_subcritical(double m, uint32_t d, double *out);

/**
 * Weighted Hardy constant `4 / (d + 2 alpha - 2)^2`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum FadeStatus fade_hardy_constant(double alpha, uint32_t d, double *out);

/**
 * The spectral gap `lambda_{m,d}`.
 *
 * # Safety
 * `out` must be null or point to a writable `double`.
 */
enum FadeStatus fade_predicted_lambda(double m, uint32_t d, double *out);

/**
 * Parses a configuration and creates a simulation handle (not yet run).
 *
 * # Safety
 * `config_text` must be a NUL-terminated string; `out` must be writable.
 */
enum FadeStatus fade_simulation_new(const char *config_text, struct FadeSimulation **out);

/**
 * Runs the simulation described by the handle's configuration.
 *
 * # Safety
 * `sim` must come from [`fade_simulation_new`] and not have been freed.
 */
enum FadeStatus fade_simulation_run(struct FadeSimulation *sim);

/**
 * Number of stored diagnostics (0 before a successful run).
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t fade_simulation_report_count(const struct FadeSimulation *sim);

/**
 * Copies diagnostic `index` into `out`.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum FadeStatus fade_simulation_report(const struct FadeSimulation *sim,
                                       size_t index,
                                       struct FadeReport *out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle not freed before.
 */
void fade_simulation_free(struct FadeSimulation *sim);

/**
 * Runs the verification suites; `CheckFailed` when any suite fails.
 *
 * # Safety
 * `config_text` must be a NUL-terminated string.
 */
enum FadeStatus fade_verify(const char *config_text, uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FADE_H */
