#ifndef MOOWARM_H
#define MOOWARM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MwStatus {
  MW_STATUS_OK = 0,
  MW_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument, malformed input or dimension mismatch.
   */
  MW_STATUS_INVALID_ARGUMENT = 2,
  MW_STATUS_IO = 3,
  MW_STATUS_INFEASIBLE = 4,
  MW_STATUS_UNBOUNDED = 5,
  MW_STATUS_LIMIT_EXCEEDED = 6,
  MW_STATUS_TOO_LARGE = 7,
  MW_STATUS_NUMERICAL = 8,
  MW_STATUS_PANIC = 9,
} MwStatus;

typedef enum MwOrdering {
  MW_ORDERING_RANDOM = 0,
  MW_ORDERING_LEXICOGRAPHIC = 1,
  MW_ORDERING_ANGLE = 2,
} MwOrdering;

typedef enum MwWarm {
  MW_WARM_NONE = 0,
  /**
   * WSM: previous optimum. ECM: preceding subproblem.
   */
  MW_WARM_WEAK = 1,
  /**
   * ECM only: best candidate from all earlier subproblems.
   */
  MW_WARM_STRONG = 2,
} MwWarm;

/**
 * Opaque multi-objective problem.
 */
typedef struct MwProblem MwProblem;

/**
 * Opaque result of one WSM or ECM run.
 */
typedef struct MwReport MwReport;

/**
 * Run totals plus warm-start and propagation counts.
 */
typedef struct MwTotals {
  size_t subproblems;
  size_t solves;
  size_t skips;
  size_t injections;
  size_t lp_iterations;
  size_t nodes;
  double wall_ms;
  size_t warm_starts;
  size_t detections;
  size_t archive_points;
} MwTotals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 */
const char *mw_last_error(void);

/**
 * Library version as a static string.
 */
const char *mw_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void mw_string_free(char *s);

/**
 * Loads an instance JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MwStatus mw_problem_load(const char *path, struct MwProblem **out);

/**
 * Parses instance JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MwStatus mw_problem_from_json(const char *json, struct MwProblem **out);

/**
 * Generates a seeded instance; `family` is `"KP"`, `"AP"` or `"TSP"`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
enum MwStatus mw_problem_generate(const char *family,
                                  size_t size,
                                  size_t p,
                                  uint64_t seed,
                                  struct MwProblem **out);

/**
 * # Safety
 * `problem` must be NULL or a handle from this library, freed at most once.
 */
void mw_problem_free(struct MwProblem *problem);

/**
 * Number of decision variables; 0 for NULL.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
size_t mw_problem_num_vars(const struct MwProblem *problem);

/**
 * Number of objectives; 0 for NULL.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
size_t mw_problem_num_objectives(const struct MwProblem *problem);

/**
 * Canonical instance JSON; release with `mw_string_free`.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum MwStatus mw_problem_to_json(const struct MwProblem *problem, char **out);

/**
 * Weighted-sum run with `samples` sampled weights.
 *
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum MwStatus mw_solve_wsm(const struct MwProblem *problem,
                           size_t samples,
                           uint32_t ordering,
                           uint32_t warm,
                           uint64_t seed,
                           struct MwReport **out);

/**
 * Augmented epsilon-constraint run. `grid` is the number of levels per
 * objective, or 0 for every integer level between ideal and nadir estimate.
 * `signature` is NULL (all ascending) or a label such as `"o+-"`.
 * `rho <= 0` selects the automatic augmentation weight.
 *
 * # Safety
 * `problem` must be a live handle; `signature` NULL or NUL-terminated;
 * `out` must be writable.
 */
enum MwStatus mw_solve_ecm(const struct MwProblem *problem,
                           size_t grid,
                           const char *signature,
                           uint32_t warm,
                           bool propagate,
                           double rho,
                           struct MwReport **out);

/**
 * # Safety
 * `report` must be NULL or a handle from this library, freed at most once.
 */
void mw_report_free(struct MwReport *report);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum MwStatus mw_report_totals(const struct MwReport *report, struct MwTotals *out);

/**
 * Copies the objective vector of archive entry `index` (lexicographic
 * order) into `values`, which must hold `capacity >= p` doubles.
 *
 * # Safety
 * `report` must be a live handle; `values` must point to `capacity`
 * writable doubles.
 */
enum MwStatus mw_report_archive_point(const struct MwReport *report,
                                      size_t index,
                                      double *values,
                                      size_t capacity);

/**
 * Per-subproblem CSV; release with `mw_string_free`.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum MwStatus mw_report_to_csv(const struct MwReport *report, char **out);

/**
 * Checks `report` against the brute-force oracle of `problem`. `passed`
 * receives the verdict; the violations, if any, are in `mw_last_error()`
 * only when the call itself fails.
 *
 * # Safety
 * Both handles must be live; `passed` must be writable.
 */
enum MwStatus mw_verify(const struct MwProblem *problem,
                        const struct MwReport *report,
                        bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOOWARM_H */
