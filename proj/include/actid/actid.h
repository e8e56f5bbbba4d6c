/* C interface to the active-set identification library.
 *
 * Handles are opaque and owned by the caller; release them with the
 * matching *_free function. Strings returned as `const char *` stay valid
 * until the owning handle is freed. Strings returned through `char **`
 * are heap copies released with actid_string_free.
 *
 * Every fallible call returns an actid_status; on failure the message is
 * available from actid_last_error() on the same thread. */
#ifndef ACTID_H
#define ACTID_H

#include <stddef.h>

#if defined(_WIN32)
#define ACTID_API __declspec(dllexport)
#else
#define ACTID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum actid_status {
  ACTID_OK = 0,
  ACTID_ERR_INVALID_ARGUMENT = 1,
  ACTID_ERR_PARSE = 2,
  ACTID_ERR_NUMERICAL = 3,
  ACTID_ERR_INFEASIBLE = 4,
  ACTID_ERR_UNBOUNDED = 5,
  ACTID_ERR_UNSUPPORTED = 6,
  ACTID_ERR_IO = 7,
  ACTID_ERR_INTERNAL = 8
} actid_status;

typedef struct actid_problem actid_problem;
typedef struct actid_report actid_report;

typedef struct actid_run_options {
  double eps_reveal; /* distance threshold, default 0.05 */
  double delta;      /* residual gate, default 0.01 */
  size_t tail;       /* trailing iterates that must agree, default 5 */
  double mu;         /* overrides the schedule when > 0 */
  size_t steps;      /* overrides the schedule when > 0 */
} actid_run_options;

ACTID_API void actid_run_options_init(actid_run_options *options);

ACTID_API const char *actid_last_error(void);
ACTID_API const char *actid_status_name(actid_status status);
ACTID_API void actid_string_free(char *s);

/* Problems */
ACTID_API actid_status actid_problem_load_file(const char *path,
                                               actid_problem **out);
ACTID_API actid_status actid_problem_load_text(const char *text,
                                               const char *name,
                                               actid_problem **out);
/* name: "two-circle", "abs-1d" or "l1-2d" */
ACTID_API actid_status actid_problem_demo(const char *name, actid_problem **out);
ACTID_API void actid_problem_free(actid_problem *problem);

ACTID_API const char *actid_problem_name(const actid_problem *problem);
ACTID_API const char *actid_problem_h_spec(const actid_problem *problem);
ACTID_API size_t actid_problem_n(const actid_problem *problem);
ACTID_API size_t actid_problem_m(const actid_problem *problem);
ACTID_API int actid_problem_has_reference(const actid_problem *problem);
ACTID_API size_t actid_problem_piece_count(const actid_problem *problem);
ACTID_API const char *actid_problem_piece_id(const actid_problem *problem,
                                             size_t index);
ACTID_API const char *
actid_problem_piece_description(const actid_problem *problem, size_t index);

/* Identification runs */
ACTID_API actid_status actid_run(const actid_problem *problem,
                                 const actid_run_options *options,
                                 actid_report **out);
ACTID_API void actid_report_free(actid_report *report);

/* TSV trace followed by the '#' summary block. */
ACTID_API const char *actid_report_trace(const actid_report *report);
ACTID_API const char *actid_report_summary(const actid_report *report);
ACTID_API const char *actid_report_pretty(const actid_report *report);
ACTID_API size_t actid_report_iterations(const actid_report *report);
ACTID_API size_t actid_report_revealed_count(const actid_report *report);
ACTID_API const char *actid_report_revealed_id(const actid_report *report,
                                               size_t index);
/* NaN when either index is out of range. */
ACTID_API double actid_report_distance(const actid_report *report,
                                       size_t iteration, size_t piece);
ACTID_API int actid_report_degraded(const actid_report *report);

/* Certification at the reference point. Index sets are 1-based. */
ACTID_API actid_status actid_certify_index(const actid_problem *problem,
                                           const size_t *indices, size_t count,
                                           int *sufficient, char **text);
ACTID_API actid_status actid_certify_piece(const actid_problem *problem,
                                           const char *piece_id,
                                           int *sufficient, char **text);
ACTID_API actid_status actid_multiplier_vertices(const actid_problem *problem,
                                                 char **text);
ACTID_API actid_status actid_transversality(const actid_problem *problem,
                                            int *holds);

/* Spectral distance table for the built-in test pair of order k. */
ACTID_API actid_status actid_spectral_demo(size_t k, char **text);

#ifdef __cplusplus
}
#endif

#endif
