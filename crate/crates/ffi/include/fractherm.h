#ifndef FRACTHERM_H
#define FRACTHERM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. Values 0–4 match the command-line exit codes.
 */
typedef enum FtStatus {
  FT_STATUS_OK = 0,
  FT_STATUS_FAILURE = 1,
  FT_STATUS_CONFIG = 2,
  FT_STATUS_HYPOTHESIS = 3,
  FT_STATUS_SOLVER = 4,
  FT_STATUS_NULL_POINTER = 6,
  FT_STATUS_BUFFER_TOO_SMALL = 7,
  FT_STATUS_PANIC = 8,
} FtStatus;

/*
 A validated problem description.
 */
typedef struct FtConfig FtConfig;

/*
 A finished run: trajectory and diagnostics.
 */
typedef struct FtRecord FtRecord;

/*
 A solver positioned at some step of its run.
 */
typedef struct FtSolver FtSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next `ft_*` call on the same thread.
 */
const char *ft_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ft_version(void);

/*
 Parse a `key = value` configuration text (the CLI file format).

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum FtStatus ft_config_from_text(const char *text, struct FtConfig **out);

/*
 Problem with `u0` given by Galerkin coefficients (`N - 1` values) and no
 source term. `conductivity` is a registered id such as `"shifted_sine"`.

 # Safety
 `conductivity` must be NUL-terminated; `u0` must point to `u0_len`
 values; `out` must be writable.
 */
enum FtStatus ft_config_new(double alpha,
                            double lambda,
                            double final_time,
                            size_t steps,
                            size_t degree,
                            const char *conductivity,
                            const double *u0,
                            size_t u0_len,
                            struct FtConfig **out);

/*
 Override the Picard tolerance and iteration cap.

 # Safety
 `config` must come from `ft_config_*` and not be freed.
 */
enum FtStatus ft_config_set_picard(struct FtConfig *config, double tol, size_t max_iter);

/*
 Degree `N`; the state vectors have `N - 1` entries.

 # Safety
 `config` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_config_degree(const struct FtConfig *config, size_t *out);

/*
 # Safety
 `config` must come from `ft_config_*` (or be null) and is invalid afterwards.
 */
void ft_config_free(struct FtConfig *config);

/*
 L1 weights `b_0..b_K` for order `alpha` on `K` uniform steps of `[0, T]`,
 and `α₀ = Γ(2-α) δ^α` (`alpha0` may be null).

 # Safety
 `buf` must hold `len` values; `needed` and `alpha0` may be null.
 */
enum FtStatus ft_l1_weights(double alpha,
                            double final_time,
                            size_t steps,
                            double *buf,
                            size_t len,
                            size_t *needed,
                            double *alpha0);

/*
 Build a solver (projects `u0`, factors the system matrix).

 # Safety
 `config` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_solver_new(const struct FtConfig *config, struct FtSolver **out);

/*
 Advance one step. Fails with `FT_STATUS_CONFIG` once the run is finished.

 # Safety
 `solver` must be a live handle.
 */
enum FtStatus ft_solver_step(struct FtSolver *solver);

/*
 Index of the latest computed state (0 before the first step).

 # Safety
 `solver` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_solver_current_step(const struct FtSolver *solver, size_t *out);

/*
 Coefficients of the latest state.

 # Safety
 `solver` must be a live handle; `buf` must hold `len` values.
 */
enum FtStatus ft_solver_state(const struct FtSolver *solver,
                              double *buf,
                              size_t len,
                              size_t *needed);

/*
 # Safety
 `solver` must come from `ft_solver_new` (or be null) and is invalid afterwards.
 */
void ft_solver_free(struct FtSolver *solver);

/*
 Run the whole configuration.

 # Safety
 `config` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_run(const struct FtConfig *config, struct FtRecord **out);

/*
 Number of stored states, `K + 1`.

 # Safety
 `record` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_record_len(const struct FtRecord *record, size_t *out);

/*
 `α₀` used by the run.

 # Safety
 `record` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_record_alpha0(const struct FtRecord *record, double *out);

/*
 `‖u^k‖₀` for every stored state.

 # Safety
 `record` must be a live handle; `buf` must hold `len` values.
 */
enum FtStatus ft_record_l2_norms(const struct FtRecord *record,
                                 double *buf,
                                 size_t len,
                                 size_t *needed);

/*
 Time levels `t_k` for every stored state.

 # Safety
 `record` must be a live handle; `buf` must hold `len` values.
 */
enum FtStatus ft_record_times(const struct FtRecord *record,
                              double *buf,
                              size_t len,
                              size_t *needed);

/*
 Coefficients of state `k`.

 # Safety
 `record` must be a live handle; `buf` must hold `len` values.
 */
enum FtStatus ft_record_state(const struct FtRecord *record,
                              size_t k,
                              double *buf,
                              size_t len,
                              size_t *needed);

/*
 Largest Picard iteration count over the run.

 # Safety
 `record` must be a live handle; `out` must be writable.
 */
enum FtStatus ft_record_max_picard_iters(const struct FtRecord *record, size_t *out);

/*
 # Safety
 `record` must come from `ft_run` (or be null) and is invalid afterwards.
 */
void ft_record_free(struct FtRecord *record);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACTHERM_H */
