#ifndef RENEWAL_RENEWAL_H
#define RENEWAL_RENEWAL_H

/* C interface of librenewal. Every call returns an rn_status; on failure the
 * message is available from rn_last_error() on the same thread until the
 * next call. Strings handed out through char** must be released with
 * rn_string_free. */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(RENEWAL_BUILDING_LIBRARY)
#    define RN_API __declspec(dllexport)
#  else
#    define RN_API __declspec(dllimport)
#  endif
#else
#  define RN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rn_status {
  RN_OK = 0,
  RN_ERR_CONFIG = 1,
  RN_ERR_NUMERICAL = 2,
  RN_ERR_VERIFICATION = 3,
  RN_ERR_INVALID_ARGUMENT = 4,
  RN_ERR_IO = 5,
  RN_ERR_INTERNAL = 6
} rn_status;

typedef struct rn_scenario rn_scenario;
typedef struct rn_measure rn_measure;
typedef struct rn_verify_report rn_verify_report;

RN_API const char* rn_version(void);
RN_API const char* rn_last_error(void);
RN_API void rn_string_free(char* s);

/* Scenarios. Relative file paths inside `text` resolve against base_dir
 * (NULL means the working directory). */
RN_API rn_status rn_scenario_load(const char* path, rn_scenario** out);
RN_API rn_status rn_scenario_parse(const char* text, const char* base_dir, rn_scenario** out);
RN_API void rn_scenario_free(rn_scenario* scenario);
RN_API const char* rn_scenario_output_dir(const rn_scenario* scenario);
RN_API rn_status rn_scenario_lambda0(const rn_scenario* scenario, double* out);

/* Commands. `log` / `text` receive a newly allocated string; pass NULL to
 * discard it. */
RN_API rn_status rn_run(const rn_scenario* scenario, const char* out_dir, char** log);
RN_API rn_status rn_spectral(const rn_scenario* scenario, char** text);
RN_API rn_status rn_verify(const rn_scenario* scenario, rn_verify_report** out);

RN_API size_t rn_verify_count(const rn_verify_report* report);
RN_API const char* rn_verify_name(const rn_verify_report* report, size_t i);
RN_API int rn_verify_passed(const rn_verify_report* report, size_t i);
RN_API const char* rn_verify_detail(const rn_verify_report* report, size_t i);
RN_API int rn_verify_all_passed(const rn_verify_report* report);
RN_API void rn_verify_free(rn_verify_report* report);

/* Snapshot measures (kind,x,value CSV). */
RN_API rn_status rn_measure_read(const char* path, rn_measure** out);
RN_API rn_status rn_measure_write(const rn_measure* measure, const char* path);
RN_API void rn_measure_free(rn_measure* measure);
RN_API rn_status rn_measure_total_variation(const rn_measure* measure, double* out);
RN_API rn_status rn_measure_atom_count(const rn_measure* measure, size_t* out);
RN_API rn_status rn_flat_distance(const rn_measure* a, const rn_measure* b, double* out);
RN_API rn_status rn_flat_distance_files(const char* path_a, const char* path_b, double* out);

#ifdef __cplusplus
}
#endif

#endif
