/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the arisim simulation library.
 *
 * The library runs seeded Monte-Carlo studies of an amplifying
 * reconfigurable surface relaying a MIMO link: channel-estimation error
 * sweeps, downlink spectral-efficiency sweeps, noise-budget checks, and
 * beam-pattern cuts.  Callers pick a named scenario, optionally override
 * parameters with a JSON document, run it, and read back aggregated records
 * or serialized CSV/JSON.
 *
 * Conventions:
 *   - Every fallible call returns an arisim_status; ARISIM_OK is zero.
 *   - On failure, arisim_last_error() returns a message for the calling
 *     thread until the next fallible call on that thread.
 *   - Objects are opaque; free them with the matching *_free function.
 *     Strings returned by accessors stay owned by the library or by the
 *     queried object and must not be freed by the caller.
 */

#ifndef ARISIM_H
#define ARISIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ARISIM_API __declspec(dllexport)
#elif defined(ARISIM_BUILD_SHARED)
#define ARISIM_API __attribute__((visibility("default")))
#else
#define ARISIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arisim_status {
  ARISIM_OK = 0,
  ARISIM_ERR_INVALID_ARGUMENT = 1, /* null pointer or out-of-domain value */
  ARISIM_ERR_CONFIG = 2,           /* unknown scenario/profile, bad JSON,
                                      out-of-range parameter */
  ARISIM_ERR_NUMERIC = 3,          /* numerical failure during a run */
  ARISIM_ERR_IO = 4,               /* file could not be written */
  ARISIM_ERR_INTERNAL = 5          /* unexpected failure */
} arisim_status;

typedef enum arisim_format {
  ARISIM_FORMAT_CSV = 0,
  ARISIM_FORMAT_JSON = 1
} arisim_format;

/* Opaque handles. */
typedef struct arisim_config arisim_config;
typedef struct arisim_results arisim_results;

/* One aggregated metric row.  String pointers are owned by the results
 * object and remain valid until it is freed. */
typedef struct arisim_record_view {
  const char* sweep_variable;
  double sweep_value;
  const char* method;
  const char* metric;
  double mean;
  double std_dev;
  int32_t trials;
  int32_t failures;
} arisim_record_view;

/* Library semantic version, e.g. "0.1.0". */
ARISIM_API const char* arisim_version(void);

/* Message describing the last failure on the calling thread, or an empty
 * string if the thread's last fallible call succeeded. */
ARISIM_API const char* arisim_last_error(void);

/* --------------------------------------------------------------------------
 * Scenario registry
 * ------------------------------------------------------------------------ */

ARISIM_API int arisim_scenario_count(void);

/* Name of the index-th scenario, or NULL if out of range. */
ARISIM_API const char* arisim_scenario_name(int index);

/* One-line description, or NULL for an unknown name. */
ARISIM_API const char* arisim_scenario_description(const char* name);

/* --------------------------------------------------------------------------
 * Configuration
 * ------------------------------------------------------------------------ */

/* Creates a configuration holding the defaults of `scenario` under
 * `profile` ("desk" for interactive sizes, "paper" for the full campaign).
 * On success *out owns the new object. */
ARISIM_API arisim_status arisim_config_create(const char* scenario,
                                              const char* profile,
                                              arisim_config** out);

/* Creates a configuration from a self-contained JSON document, which must
 * include a "scenario" key ("profile" falls back to `default_profile`, or
 * "desk" when NULL).  On success *out owns the new object. */
ARISIM_API arisim_status arisim_config_create_from_json(
    const char* json_text, const char* default_profile, arisim_config** out);

/* Applies a JSON override document.  Unknown keys, wrong types, and
 * out-of-range values are rejected and leave the configuration unchanged.
 * "scenario" and "profile" keys re-resolve the scenario defaults before the
 * remaining overrides apply. */
ARISIM_API arisim_status arisim_config_apply_json(arisim_config* cfg,
                                                  const char* json_text);

/* Replaces the master seed of the Monte-Carlo sweep. */
ARISIM_API arisim_status arisim_config_set_seed(arisim_config* cfg,
                                                uint64_t seed);

/* Scenario and profile the configuration is bound to.  The strings are
 * owned by the configuration; NULL for a NULL handle. */
ARISIM_API const char* arisim_config_scenario(const arisim_config* cfg);
ARISIM_API const char* arisim_config_profile(const arisim_config* cfg);

/* Re-checks all invariants (positive sizes, nonempty sweep, ...). */
ARISIM_API arisim_status arisim_config_validate(const arisim_config* cfg);

ARISIM_API void arisim_config_free(arisim_config* cfg);

/* --------------------------------------------------------------------------
 * Execution
 * ------------------------------------------------------------------------ */

/* Runs the configured scenario, spreading trials over `workers` threads
 * (values below 1 mean 1).  A fixed configuration and seed produce
 * bit-identical records for any worker count.  On success *out owns the
 * results. */
ARISIM_API arisim_status arisim_run(const arisim_config* cfg, int workers,
                                    arisim_results** out);

/* Measures the offline (sensing-operator construction and dictionary
 * reduction) versus online (sparse recovery) wall-clock split of every
 * estimator.  Valid for nmse-* scenarios only.  Timing records vary from
 * run to run by nature. */
ARISIM_API arisim_status arisim_time_phases(const arisim_config* cfg,
                                            int workers,
                                            arisim_results** out);

/* --------------------------------------------------------------------------
 * Results
 * ------------------------------------------------------------------------ */

ARISIM_API size_t arisim_results_count(const arisim_results* results);

/* Copies row `index` into *view (strings stay owned by `results`). */
ARISIM_API arisim_status arisim_results_get(const arisim_results* results,
                                            size_t index,
                                            arisim_record_view* view);

/* Serialized form; the returned string is owned by `results`.  CSV columns:
 * sweep_variable,sweep_value,method,metric,mean,std,trials,failures. */
ARISIM_API const char* arisim_results_csv(const arisim_results* results);
ARISIM_API const char* arisim_results_json(const arisim_results* results);

/* Writes the serialized form to `path`. */
ARISIM_API arisim_status arisim_results_write(const arisim_results* results,
                                              const char* path,
                                              arisim_format format);

ARISIM_API void arisim_results_free(arisim_results* results);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ARISIM_H */
