/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef NARE_H
#define NARE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NareStrategyKind {
  NARE_STRATEGY_KIND_LEJA = 0,
  NARE_STRATEGY_KIND_HAMILTONIAN = 1,
} NareStrategyKind;

typedef enum NareOrientation {
  NARE_ORIENTATION_CONSISTENT = 0,
  NARE_ORIENTATION_PAPER_LITERAL = 1,
} NareOrientation;

typedef enum NareStatus {
  NARE_STATUS_OK = 0,
  NARE_STATUS_NULL_POINTER = 1,
  NARE_STATUS_INVALID_ARGUMENT = 2,
  NARE_STATUS_DIMENSION_MISMATCH = 3,
  NARE_STATUS_SINGULAR_SYSTEM = 4,
  NARE_STATUS_BREAKDOWN = 5,
  NARE_STATUS_IO = 6,
  NARE_STATUS_PANIC = 7,
  NARE_STATUS_BUFFER_TOO_SMALL = 8,
} NareStatus;

typedef enum NareStopCause {
  NARE_STOP_CAUSE_CONVERGED = 0,
  NARE_STOP_CAUSE_MAX_ITERATIONS = 1,
  NARE_STOP_CAUSE_DIVERGED = 2,
  NARE_STOP_CAUSE_SHIFT_STARVATION = 3,
} NareStopCause;

/**
 * Opaque problem handle.
 */
typedef struct NareProblemHandle NareProblemHandle;

/**
 * Opaque solution handle.
 */
typedef struct NareSolutionHandle NareSolutionHandle;

typedef struct NareOptions {
  double tol;
  uintptr_t max_iter;
  double div_threshold;
  /**
   * Nonzero: conjugate pairs use the real-arithmetic double step.
   */
  int32_t real_arith;
  enum NareStrategyKind strategy;
  uintptr_t s;
  /**
   * Nonzero: recompute shifts every step.
   */
  int32_t recompute;
  enum NareOrientation orientation;
} NareOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Defaults: tol 1e-12, 300 iterations, divergence at 1e12, real
 * arithmetic on, Leja with `s = 1`, consistent orientation.
 */
struct NareOptions nare_options_default(void);

/**
 * Dense problem `X C X - X D - A X + B = 0` with `B = LB RB`, `C = LC RC`.
 * `a` is m x m, `d` n x n, `lb` m x p, `rb` p x n, `lc` n x q, `rc` q x m.
 *
 * # Safety
 * Each pointer must reference a column-major array of the stated size;
 * `out` must be writable.
 */
enum NareStatus nare_problem_new_dense(uintptr_t m,
                                       uintptr_t n,
                                       uintptr_t p,
                                       uintptr_t q,
                                       const double *a,
                                       const double *d,
                                       const double *lb,
                                       const double *rb,
                                       const double *lc,
                                       const double *rc,
                                       struct NareProblemHandle **out);

/**
 * Transport benchmark of size `n` in its minimal-solution form.
 *
 * # Safety
 * `out` must be writable.
 */
enum NareStatus nare_problem_transport(uintptr_t n,
                                       double c_alpha,
                                       double c_beta,
                                       uint64_t seed,
                                       struct NareProblemHandle **out);

/**
 * # Safety
 * `problem` must come from a `nare_problem_*` constructor or be null.
 */
void nare_problem_free(struct NareProblemHandle *problem);

/**
 * Writes `m`, `n` of the problem.
 *
 * # Safety
 * `problem` must be a live handle; `m` and `n` must be writable.
 */
enum NareStatus nare_problem_dims(const struct NareProblemHandle *problem,
                                  uintptr_t *m,
                                  uintptr_t *n);

/**
 * Runs the solver. A solution handle is produced for every stop cause;
 * query it with `nare_solution_cause`.
 *
 * # Safety
 * `problem` must be a live handle; `options` may be null for defaults;
 * `out` must be writable.
 */
enum NareStatus nare_solve(const struct NareProblemHandle *problem,
                           const struct NareOptions *options,
                           struct NareSolutionHandle **out);

/**
 * # Safety
 * `solution` must come from `nare_solve` or be null.
 */
void nare_solution_free(struct NareSolutionHandle *solution);

/**
 * # Safety
 * `solution` must be a live handle.
 */
enum NareStopCause nare_solution_cause(const struct NareSolutionHandle *solution);

/**
 * Iteration count (a conjugate double step counts as two).
 *
 * # Safety
 * `solution` must be a live handle or null (returns 0).
 */
uintptr_t nare_solution_iterations(const struct NareSolutionHandle *solution);

/**
 * Number of columns of `LX` (rank of the factored approximation).
 *
 * # Safety
 * `solution` must be a live handle or null (returns 0).
 */
uintptr_t nare_solution_rank(const struct NareSolutionHandle *solution);

/**
 * Relative residual `nu` at the last accepted step; NaN for a null handle.
 *
 * # Safety
 * `solution` must be a live handle or null.
 */
double nare_solution_residual(const struct NareSolutionHandle *solution);

/**
 * Copies `LX` (m x rank, column-major) into `buf`.
 *
 * # Safety
 * `solution` must be a live handle; `buf` must hold `len` doubles.
 */
enum NareStatus nare_solution_lx(const struct NareSolutionHandle *solution,
                                 double *buf,
                                 uintptr_t len);

/**
 * Copies `RX` (rank x n, column-major) into `buf`.
 *
 * # Safety
 * `solution` must be a live handle; `buf` must hold `len` doubles.
 */
enum NareStatus nare_solution_rx(const struct NareSolutionHandle *solution,
                                 double *buf,
                                 uintptr_t len);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *nare_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NARE_H */
