/* Exercises the shared library from C only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "renewal/renewal.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static const char* kScenario =
    "[birth_law]\nkind = constant\nbeta = 1\n"
    "[initial]\natoms = 0.5:1\n"
    "[numerics]\nh = 0.01\ndt = 0.01\nT = 2\nx_max = 24\n"
    "[diagnostics]\nsample_dt = 0.5\nsnapshot_times = 0, 1\n";

int main(int argc, char** argv) {
  const char* out_dir = argc > 1 ? argv[1] : "capi_out";
  rn_scenario* sc = NULL;
  char path[1024];

  EXPECT(strcmp(rn_version(), "0.1.0") == 0);
  EXPECT(rn_scenario_parse(kScenario, NULL, &sc) == RN_OK);
  EXPECT(sc != NULL);

  double lambda0 = 0.0;
  EXPECT(rn_scenario_lambda0(sc, &lambda0) == RN_OK);
  EXPECT(fabs(lambda0 - 1.0) <= 1e-10);

  char* text = NULL;
  EXPECT(rn_spectral(sc, &text) == RN_OK);
  EXPECT(text != NULL && strstr(text, "lambda0 = ") == text);
  EXPECT(text != NULL && strstr(text, "\nx,N,phi\n") != NULL);
  rn_string_free(text);

  char* log = NULL;
  EXPECT(rn_run(sc, out_dir, &log) == RN_OK);
  EXPECT(log != NULL && strstr(log, "births.csv") != NULL);
  rn_string_free(log);

  /* The atom has moved from 0.5 to 1.5 and carries exp(-1). */
  rn_measure* t0 = NULL;
  rn_measure* t1 = NULL;
  snprintf(path, sizeof path, "%s/snapshot_t0.csv", out_dir);
  EXPECT(rn_measure_read(path, &t0) == RN_OK);
  snprintf(path, sizeof path, "%s/snapshot_t1.csv", out_dir);
  EXPECT(rn_measure_read(path, &t1) == RN_OK);
  size_t atoms = 0;
  EXPECT(rn_measure_atom_count(t1, &atoms) == RN_OK && atoms == 1);
  double tv = 0.0;
  EXPECT(rn_measure_total_variation(t0, &tv) == RN_OK && fabs(tv - 1.0) <= 1e-12);
  double d = -1.0;
  EXPECT(rn_flat_distance(t0, t0, &d) == RN_OK && d == 0.0);
  EXPECT(rn_flat_distance(t0, t1, &d) == RN_OK && d > 0.0 && d <= 2.0);
  rn_measure_free(t0);
  rn_measure_free(t1);

  rn_verify_report* report = NULL;
  EXPECT(rn_verify(sc, &report) == RN_OK);
  EXPECT(rn_verify_count(report) >= 5);
  EXPECT(rn_verify_all_passed(report) == 1);
  EXPECT(strcmp(rn_verify_name(report, 0), "conservation") == 0);
  EXPECT(rn_verify_name(report, 1000) == NULL);
  rn_verify_free(report);
  rn_scenario_free(sc);

  /* Error paths. */
  sc = NULL;
  EXPECT(rn_scenario_parse("[birth_law]\nkind = constant\nbeta = 0.5\n", NULL, &sc) == RN_ERR_CONFIG);
  EXPECT(sc == NULL);
  EXPECT(strstr(rn_last_error(), "net reproduction below one") != NULL);
  EXPECT(rn_scenario_parse(NULL, NULL, &sc) == RN_ERR_INVALID_ARGUMENT);
  EXPECT(rn_scenario_load("/nonexistent/scenario.ini", &sc) == RN_ERR_CONFIG);
  EXPECT(rn_measure_read("/nonexistent/m.csv", &t0) == RN_ERR_CONFIG);
  EXPECT(rn_flat_distance(NULL, NULL, &d) == RN_ERR_INVALID_ARGUMENT);

  /* Too short a window for the reference measure of J. */
  EXPECT(rn_scenario_parse(
             "[birth_law]\nkind = constant\nbeta = 1\n[initial]\natoms = 0.5:1\n"
             "[numerics]\nh = 0.01\ndt = 0.01\nT = 2\nx_max = 8\n",
             NULL, &sc) == RN_OK);
  EXPECT(rn_run(sc, out_dir, NULL) == RN_ERR_NUMERICAL);
  EXPECT(strstr(rn_last_error(), "enlarge x_max") != NULL);
  rn_scenario_free(sc);

  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  else printf("capi: all checks passed\n");
  return failures ? 1 : 0;
}
