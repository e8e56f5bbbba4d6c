#include "actid/actid.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                            \
  do {                                                                         \
    if (!(cond)) {                                                             \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                              \
    }                                                                          \
  } while (0)

static void test_demo_problem(void) {
  actid_problem *p = NULL;
  CHECK(actid_problem_demo("two-circle", &p) == ACTID_OK);
  if (!p)
    return;
  CHECK(strcmp(actid_problem_name(p), "two-circle") == 0);
  CHECK(actid_problem_n(p) == 2);
  CHECK(actid_problem_m(p) == 3);
  CHECK(actid_problem_has_reference(p));
  CHECK(actid_problem_piece_count(p) == 4);
  CHECK(strcmp(actid_problem_piece_id(p, 2), "G3") == 0);
  CHECK(actid_problem_piece_id(p, 99) == NULL);
  CHECK(strstr(actid_problem_piece_description(p, 0), "J = {}") != NULL);

  actid_run_options opt;
  actid_run_options_init(&opt);
  CHECK(opt.eps_reveal == 0.05 && opt.delta == 0.01 && opt.tail == 5);

  actid_report *r = NULL;
  CHECK(actid_run(p, &opt, &r) == ACTID_OK);
  if (r) {
    CHECK(actid_report_iterations(r) == 16);
    CHECK(actid_report_revealed_count(r) == 2);
    CHECK(strcmp(actid_report_revealed_id(r, 0), "G3") == 0);
    CHECK(strcmp(actid_report_revealed_id(r, 1), "G4") == 0);
    CHECK(actid_report_revealed_id(r, 2) == NULL);
    CHECK(!actid_report_degraded(r));
    CHECK(actid_report_distance(r, 15, 2) < 1e-6);
    CHECK(actid_report_distance(r, 15, 1) > 0.24);
    CHECK(isnan(actid_report_distance(r, 16, 0)));
    CHECK(strncmp(actid_report_trace(r), "r\t", 2) == 0);
    CHECK(strstr(actid_report_summary(r), "G3") != NULL);
    CHECK(strlen(actid_report_pretty(r)) > 0);
    actid_report_free(r);
  }

  const size_t j2[] = {2};
  int sufficient = -1;
  char *text = NULL;
  CHECK(actid_certify_index(p, j2, 1, &sufficient, &text) == ACTID_OK);
  CHECK(sufficient == 1);
  CHECK(text && strlen(text) > 0);
  actid_string_free(text);

  const size_t empty_j[] = {0};
  CHECK(actid_certify_index(p, empty_j, 0, &sufficient, NULL) == ACTID_OK);
  CHECK(sufficient == 0);

  const size_t out_of_range[] = {5};
  CHECK(actid_certify_index(p, out_of_range, 1, &sufficient, NULL) ==
        ACTID_ERR_INVALID_ARGUMENT);
  CHECK(strlen(actid_last_error()) > 0);

  text = NULL;
  CHECK(actid_certify_piece(p, "G1", &sufficient, &text) == ACTID_OK);
  CHECK(sufficient == 0);
  actid_string_free(text);
  CHECK(actid_certify_piece(p, "G9", &sufficient, NULL) ==
        ACTID_ERR_INVALID_ARGUMENT);
  CHECK(strstr(actid_last_error(), "G9") != NULL);

  text = NULL;
  CHECK(actid_multiplier_vertices(p, &text) == ACTID_OK);
  CHECK(text && strlen(text) > 0);
  actid_string_free(text);

  int holds = -1;
  CHECK(actid_transversality(p, &holds) == ACTID_OK);
  CHECK(holds == 1);

  actid_problem_free(p);
}

static void test_errors(void) {
  actid_problem *p = NULL;
  CHECK(actid_problem_demo("nosuch", &p) == ACTID_ERR_INVALID_ARGUMENT);
  CHECK(p == NULL);
  CHECK(actid_problem_demo(NULL, &p) == ACTID_ERR_INVALID_ARGUMENT);
  CHECK(actid_problem_load_file("/nonexistent.idk", &p) == ACTID_ERR_IO);
  CHECK(actid_problem_load_text("[problem]\nn = 1\nh = abs_scalar\nc1 = x1 +\n",
                                "broken", &p) == ACTID_ERR_PARSE);
  CHECK(strstr(actid_last_error(), "4") != NULL);
  CHECK(strcmp(actid_status_name(ACTID_ERR_INFEASIBLE), "infeasible") == 0);
  CHECK(strcmp(actid_status_name(ACTID_OK), "ok") == 0);
  CHECK(actid_run(NULL, NULL, NULL) == ACTID_ERR_INVALID_ARGUMENT);

  /* Null handles are accepted by the release functions. */
  actid_problem_free(NULL);
  actid_report_free(NULL);
  actid_string_free(NULL);
}

static void test_file_and_degraded(void) {
  actid_problem *p = NULL;
  CHECK(actid_problem_load_file(ACTID_PROBLEMS_DIR "/two_circle_noref.idk", &p) ==
        ACTID_OK);
  if (!p)
    return;
  CHECK(!actid_problem_has_reference(p));
  actid_report *r = NULL;
  CHECK(actid_run(p, NULL, &r) == ACTID_OK);
  if (r) {
    CHECK(actid_report_degraded(r));
    CHECK(actid_report_iterations(r) == 20);
    actid_report_free(r);
  }
  int holds = 0;
  CHECK(actid_transversality(p, &holds) == ACTID_ERR_INVALID_ARGUMENT);
  actid_problem_free(p);

  CHECK(actid_problem_load_file(ACTID_PROBLEMS_DIR "/norm_2d.idk", &p) == ACTID_OK);
  if (p) {
    CHECK(actid_run(p, NULL, &r) == ACTID_OK);
    actid_report_free(r);
    actid_problem_free(p);
  }
}

static void test_spectral(void) {
  char *text = NULL;
  CHECK(actid_spectral_demo(2, &text) == ACTID_OK);
  CHECK(text && strstr(text, "2\t1\tG_2_1\t0.565685") != NULL);
  actid_string_free(text);
  CHECK(actid_spectral_demo(0, &text) == ACTID_ERR_INVALID_ARGUMENT);
}

int main(void) {
  test_demo_problem();
  test_errors();
  test_file_and_degraded();
  test_spectral();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  puts("all C API checks passed");
  return 0;
}
