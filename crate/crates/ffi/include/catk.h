#ifndef CATK_H
#define CATK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a fallible call.
typedef enum CatkStatus {
  CATK_STATUS_OK = 0,
  CATK_STATUS_NULL_POINTER = 1,
  CATK_STATUS_INVALID_UTF8 = 2,
  CATK_STATUS_PARSE = 3,
  CATK_STATUS_SCENARIO = 4,
  CATK_STATUS_CURVATURE = 5,
  CATK_STATUS_GEOMETRY = 6,
  CATK_STATUS_COMPLEX = 7,
  CATK_STATUS_REGION = 8,
  CATK_STATUS_CONVERGENCE = 9,
  CATK_STATUS_HOMOLOGY = 10,
  CATK_STATUS_IO = 11,
  // A Rust panic was caught at the boundary.
  CATK_STATUS_PANIC = 12,
} CatkStatus;

// The outcome of running a scenario.
typedef struct CatkReport CatkReport;

// A parsed, validated scenario.
typedef struct CatkScenario CatkScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *catk_version(void);

// Message of the last failed call on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *catk_last_error(void);

// Parse and validate a scenario document.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum CatkStatus catk_scenario_from_json(const char *json, struct CatkScenario **out);

// Built-in scenario by name.
//
// # Safety
// `name` must be a nul-terminated string; `out` must be writable.
enum CatkStatus catk_scenario_example(const char *name, struct CatkScenario **out);

// Override the run seed.
//
// # Safety
// `sc` must be a live scenario handle.
enum CatkStatus catk_scenario_set_seed(struct CatkScenario *sc, uint64_t seed);

// Override the mesh size; rejected unless positive and finite.
//
// # Safety
// `sc` must be a live scenario handle.
enum CatkStatus catk_scenario_set_h(struct CatkScenario *sc, double h);

// Hex SHA-256 of the canonical scenario serialization.
//
// # Safety
// `sc` must be a live scenario handle; `out` must be writable.
enum CatkStatus catk_scenario_hash(const struct CatkScenario *sc, char **out);

// Pretty-printed scenario document.
//
// # Safety
// `sc` must be a live scenario handle; `out` must be writable.
enum CatkStatus catk_scenario_to_json(const struct CatkScenario *sc, char **out);

// # Safety
// `sc` must be null or a handle not yet freed.
void catk_scenario_free(struct CatkScenario *sc);

// Run a scenario. Violations are not errors; they are recorded in the report.
//
// # Safety
// `sc` must be a live scenario handle; `out` must be writable.
enum CatkStatus catk_run(const struct CatkScenario *sc, struct CatkReport **out);

// Full report (body and metadata) as JSON.
//
// # Safety
// `r` must be a live report handle; `out` must be writable.
enum CatkStatus catk_report_json(const struct CatkReport *r, char **out);

// Report body as JSON; identical across runs of the same scenario.
//
// # Safety
// `r` must be a live report handle; `out` must be writable.
enum CatkStatus catk_report_body_json(const struct CatkReport *r, char **out);

// 0 when the outcome matches the scenario's expectation, 2 when it does not, -1 for a null handle.
//
// # Safety
// `r` must be null or a live report handle.
int32_t catk_report_exit_code(const struct CatkReport *r);

// Number of recorded failures (violations and failed checks).
//
// # Safety
// `r` must be null or a live report handle.
size_t catk_report_failure_count(const struct CatkReport *r);

// # Safety
// `r` must be null or a handle not yet freed.
void catk_report_free(struct CatkReport *r);

// Release a string returned by this library.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void catk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATK_H */
