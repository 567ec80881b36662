/* Exercises the shared library through its C header only. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "fibreqm/fibreqm.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static const char* kMinimal =
    "{\"name\": \"c_minimal\", \"dimension\": 2,"
    " \"grid\": {\"t0\": 0, \"t1\": 1, \"steps\": 1000},"
    " \"hamiltonian\": {\"kind\": \"constant\", \"matrix\": [[1, 0], [0, -1]]},"
    " \"trivialization\": {\"kind\": \"global_phase\", \"omega\": 2.0}}";

static void test_errors(void) {
  fqm_scenario* s = NULL;
  EXPECT(fqm_scenario_load_string("{ nope", &s) == FQM_PARSE);
  EXPECT(s == NULL);
  EXPECT(strlen(fqm_last_error()) > 0);
  EXPECT(fqm_scenario_load_string("{\"name\": \"x\", \"dimension\": 2, \"bogus\": 1}", &s) == FQM_SCHEMA);
  EXPECT(fqm_scenario_load_file("/nonexistent.json", &s) == FQM_IO);
  EXPECT(fqm_scenario_load_builtin("no_such_scenario", &s) == FQM_INVALID_ARGUMENT);
  EXPECT(fqm_scenario_load_string(NULL, &s) == FQM_INVALID_ARGUMENT);
  EXPECT(strcmp(fqm_status_string(FQM_DIMENSION), "dimension mismatch") == 0);
  EXPECT(fqm_report_passed(NULL) == -1);
  fqm_scenario_free(NULL);
  fqm_report_free(NULL);
}

static void test_run(void) {
  fqm_scenario* s = NULL;
  fqm_report* r = NULL;
  char* text = NULL;
  size_t len = 0;
  EXPECT(fqm_scenario_load_string(kMinimal, &s) == FQM_OK);
  EXPECT(strcmp(fqm_scenario_name(s), "c_minimal") == 0);
  EXPECT(fqm_scenario_to_json(s, &text) == FQM_OK);
  EXPECT(strstr(text, "\"eq_tol\"") != NULL);
  fqm_free_string(text);

  EXPECT(fqm_run_scenario(s, &r) == FQM_OK);
  EXPECT(fqm_report_passed(r) == 1);
  EXPECT(fqm_report_scenario_count(r) == 1);
  EXPECT(fqm_report_emit(r, "records", &text, &len) == FQM_OK);
  EXPECT(len == strlen(text));

  fqm_report* back = NULL;
  EXPECT(fqm_report_load_string(text, &back) == FQM_OK);
  EXPECT(fqm_report_passed(back) == 1);
  fqm_report_free(back);
  fqm_free_string(text);

  EXPECT(fqm_report_emit(r, "xml", &text, &len) == FQM_UNKNOWN_FORMAT);
  EXPECT(text == NULL);
  EXPECT(fqm_report_emit(r, "timeseries", &text, NULL) == FQM_OK);
  EXPECT(strncmp(text, "scenario,t,quantity,value\n", 26) == 0);
  EXPECT(strstr(text, "\nc_minimal,0,") != NULL);
  fqm_free_string(text);
  fqm_report_free(r);
  fqm_scenario_free(s);
}

static void test_builtin_and_suite(void) {
  fqm_scenario* s = NULL;
  fqm_report* r = NULL;
  size_t i;
  EXPECT(fqm_catalog_count() == 10);
  for (i = 0; i < fqm_catalog_count(); ++i) EXPECT(fqm_catalog_name(i) != NULL);
  EXPECT(fqm_catalog_name(fqm_catalog_count()) == NULL);

  EXPECT(fqm_scenario_load_builtin("single_point", &s) == FQM_OK);
  EXPECT(fqm_run_scenario(s, &r) == FQM_OK);
  EXPECT(fqm_report_passed(r) == 1);
  fqm_report_free(r);
  fqm_scenario_free(s);

  EXPECT(fqm_run_suite("/nonexistent/manifest.json", 1, &r) != FQM_OK);
  EXPECT(r == NULL);
}

int main(void) {
  printf("fibreqm %s\n", fqm_version());
  test_errors();
  test_run();
  test_builtin_and_suite();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("c api: ok\n");
  return 0;
}
