/* fibreqm C API.
 *
 * Opaque handles, status codes, caller-owned strings. Every function that can
 * fail returns an fqm_status; on failure the message is available from
 * fqm_last_error() on the same thread until the next call.
 */
#ifndef FIBREQM_H
#define FIBREQM_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FQM_BUILDING_LIBRARY)
#    define FQM_API __declspec(dllexport)
#  else
#    define FQM_API __declspec(dllimport)
#  endif
#else
#  define FQM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fqm_status {
  FQM_OK = 0,
  FQM_INVALID_ARGUMENT = 1,
  FQM_IO = 2,
  FQM_PARSE = 3,
  FQM_SCHEMA = 4,
  FQM_DIMENSION = 5,
  FQM_NUMERICAL = 6,
  FQM_UNKNOWN_FORMAT = 7,
  FQM_INTERNAL = 8
} fqm_status;

typedef struct fqm_scenario fqm_scenario;
typedef struct fqm_report fqm_report;

FQM_API const char* fqm_version(void);
FQM_API const char* fqm_status_string(fqm_status status);
/* Message of the last failure on this thread; "" if none. */
FQM_API const char* fqm_last_error(void);

/* Scenarios. */
FQM_API fqm_status fqm_scenario_load_file(const char* path, fqm_scenario** out);
FQM_API fqm_status fqm_scenario_load_string(const char* json_text, fqm_scenario** out);
FQM_API fqm_status fqm_scenario_load_builtin(const char* name, fqm_scenario** out);
/* Fully resolved config as JSON; release with fqm_free_string. */
FQM_API fqm_status fqm_scenario_to_json(const fqm_scenario* scenario, char** out);
FQM_API const char* fqm_scenario_name(const fqm_scenario* scenario);
FQM_API void fqm_scenario_free(fqm_scenario* scenario);

/* Runs. A failing check is not an error: the call returns FQM_OK and the
 * report says fail. */
FQM_API fqm_status fqm_run_scenario(const fqm_scenario* scenario, fqm_report** out);
/* source: manifest file, directory, or "builtin". threads = 0 picks a default. */
FQM_API fqm_status fqm_run_suite(const char* source, size_t threads, fqm_report** out);

/* Reports (a single scenario or a suite). */
FQM_API fqm_status fqm_report_load_file(const char* path, fqm_report** out);
FQM_API fqm_status fqm_report_load_string(const char* json_text, fqm_report** out);
/* 1 pass, 0 fail, -1 on a null handle. */
FQM_API int fqm_report_passed(const fqm_report* report);
FQM_API size_t fqm_report_scenario_count(const fqm_report* report);
FQM_API size_t fqm_report_warning_count(const fqm_report* report);
FQM_API const char* fqm_report_warning(const fqm_report* report, size_t index);
/* format: "table", "records" or "timeseries". Release *out with
 * fqm_free_string; *length excludes the terminator and may be NULL. */
FQM_API fqm_status fqm_report_emit(const fqm_report* report, const char* format, char** out,
                                   size_t* length);
FQM_API void fqm_report_free(fqm_report* report);

/* Built-in catalog. */
FQM_API size_t fqm_catalog_count(void);
FQM_API const char* fqm_catalog_name(size_t index);
FQM_API const char* fqm_catalog_description(size_t index);
FQM_API fqm_status fqm_catalog_export(const char* directory);

FQM_API void fqm_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif /* FIBREQM_H */
