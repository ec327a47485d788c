// SPDX-License-Identifier: Apache-2.0
//
// extern-C shim over the core experiment harness: opaque handles, status
// codes, and a thread-local error message.  No exception may cross the
// boundary.

#include "arisim/arisim.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/experiment.hpp"

struct arisim_config {
  arisim::ExperimentConfig cfg;
};

struct arisim_results {
  std::vector<arisim::ResultRecord> records;
  std::string csv;
  std::string json;
};

namespace {

thread_local std::string t_last_error;

arisim_status fail(arisim_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

arisim_status ok() {
  t_last_error.clear();
  return ARISIM_OK;
}

// Maps an in-flight exception to a status code and message.
arisim_status from_exception() {
  try {
    throw;
  } catch (const arisim::config_error& e) {
    return fail(ARISIM_ERR_CONFIG, e.what());
  } catch (const arisim::singular_matrix_error& e) {
    return fail(ARISIM_ERR_NUMERIC, e.what());
  } catch (const arisim::allocation_limit_error& e) {
    return fail(ARISIM_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ARISIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ARISIM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ARISIM_ERR_INTERNAL, "unknown error");
  }
}

arisim_results* make_results(std::vector<arisim::ResultRecord> records) {
  auto res = std::make_unique<arisim_results>();
  res->records = std::move(records);
  res->csv = arisim::records_to_csv(res->records);
  res->json = arisim::records_to_json(res->records);
  return res.release();
}

}  // namespace

extern "C" {

const char* arisim_version(void) { return "0.1.0"; }

const char* arisim_last_error(void) { return t_last_error.c_str(); }

int arisim_scenario_count(void) {
  return int(arisim::scenario_names().size());
}

const char* arisim_scenario_name(int index) {
  // The registry is static; cache the name list so returned pointers stay
  // valid for the process lifetime.
  static const std::vector<std::string> names = arisim::scenario_names();
  if (index < 0 || size_t(index) >= names.size()) return nullptr;
  return names[size_t(index)].c_str();
}

const char* arisim_scenario_description(const char* name) {
  if (!name || !arisim::is_scenario(name)) return nullptr;
  static thread_local std::string description;
  description = arisim::scenario_description(name);
  return description.c_str();
}

arisim_status arisim_config_create(const char* scenario, const char* profile,
                                   arisim_config** out) {
  if (!out) return fail(ARISIM_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  if (!scenario)
    return fail(ARISIM_ERR_INVALID_ARGUMENT, "scenario is null");
  try {
    arisim::ExperimentConfig cfg =
        arisim::scenario_defaults(scenario, profile ? profile : "desk");
    *out = new arisim_config{std::move(cfg)};
    return ok();
  } catch (...) {
    return from_exception();
  }
}

arisim_status arisim_config_create_from_json(const char* json_text,
                                             const char* default_profile,
                                             arisim_config** out) {
  if (!out) return fail(ARISIM_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  if (!json_text)
    return fail(ARISIM_ERR_INVALID_ARGUMENT, "json_text is null");
  try {
    arisim::ExperimentConfig cfg = arisim::config_from_json(
        json_text, default_profile ? default_profile : "desk");
    *out = new arisim_config{std::move(cfg)};
    return ok();
  } catch (...) {
    return from_exception();
  }
}

arisim_status arisim_config_apply_json(arisim_config* cfg,
                                       const char* json_text) {
  if (!cfg) return fail(ARISIM_ERR_INVALID_ARGUMENT, "config is null");
  if (!json_text)
    return fail(ARISIM_ERR_INVALID_ARGUMENT, "json_text is null");
  try {
    // Stage onto a copy so a rejected document leaves `cfg` untouched.
    arisim::ExperimentConfig staged = cfg->cfg;
    arisim::apply_config_json(staged, json_text);
    cfg->cfg = std::move(staged);
    return ok();
  } catch (...) {
    return from_exception();
  }
}

arisim_status arisim_config_set_seed(arisim_config* cfg, uint64_t seed) {
  if (!cfg) return fail(ARISIM_ERR_INVALID_ARGUMENT, "config is null");
  cfg->cfg.seed = seed;
  return ok();
}

const char* arisim_config_scenario(const arisim_config* cfg) {
  return cfg ? cfg->cfg.scenario.c_str() : nullptr;
}

const char* arisim_config_profile(const arisim_config* cfg) {
  return cfg ? cfg->cfg.profile.c_str() : nullptr;
}

arisim_status arisim_config_validate(const arisim_config* cfg) {
  if (!cfg) return fail(ARISIM_ERR_INVALID_ARGUMENT, "config is null");
  try {
    arisim::validate_config(cfg->cfg);
    return ok();
  } catch (...) {
    return from_exception();
  }
}

void arisim_config_free(arisim_config* cfg) { delete cfg; }

arisim_status arisim_run(const arisim_config* cfg, int workers,
                         arisim_results** out) {
  if (!out) return fail(ARISIM_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  if (!cfg) return fail(ARISIM_ERR_INVALID_ARGUMENT, "config is null");
  try {
    *out = make_results(
        arisim::run_scenario(cfg->cfg, workers < 1 ? 1 : workers));
    return ok();
  } catch (...) {
    return from_exception();
  }
}

arisim_status arisim_time_phases(const arisim_config* cfg, int workers,
                                 arisim_results** out) {
  if (!out) return fail(ARISIM_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  if (!cfg) return fail(ARISIM_ERR_INVALID_ARGUMENT, "config is null");
  try {
    *out = make_results(
        arisim::time_phases(cfg->cfg, workers < 1 ? 1 : workers));
    return ok();
  } catch (...) {
    return from_exception();
  }
}

size_t arisim_results_count(const arisim_results* results) {
  return results ? results->records.size() : 0;
}

arisim_status arisim_results_get(const arisim_results* results, size_t index,
                                 arisim_record_view* view) {
  if (!results) return fail(ARISIM_ERR_INVALID_ARGUMENT, "results is null");
  if (!view) return fail(ARISIM_ERR_INVALID_ARGUMENT, "view is null");
  if (index >= results->records.size())
    return fail(ARISIM_ERR_INVALID_ARGUMENT,
                "record index " + std::to_string(index) + " out of range");
  const arisim::ResultRecord& r = results->records[index];
  view->sweep_variable = r.sweep_variable.c_str();
  view->sweep_value = r.sweep_value;
  view->method = r.method.c_str();
  view->metric = r.metric.c_str();
  view->mean = r.mean;
  view->std_dev = r.std_dev;
  view->trials = r.trials;
  view->failures = r.failures;
  return ok();
}

const char* arisim_results_csv(const arisim_results* results) {
  return results ? results->csv.c_str() : nullptr;
}

const char* arisim_results_json(const arisim_results* results) {
  return results ? results->json.c_str() : nullptr;
}

arisim_status arisim_results_write(const arisim_results* results,
                                   const char* path, arisim_format format) {
  if (!results) return fail(ARISIM_ERR_INVALID_ARGUMENT, "results is null");
  if (!path) return fail(ARISIM_ERR_INVALID_ARGUMENT, "path is null");
  if (format != ARISIM_FORMAT_CSV && format != ARISIM_FORMAT_JSON)
    return fail(ARISIM_ERR_INVALID_ARGUMENT, "unknown output format");
  try {
    arisim::write_text_file(
        path, format == ARISIM_FORMAT_CSV ? results->csv : results->json);
    return ok();
  } catch (const std::exception& e) {
    return fail(ARISIM_ERR_IO, e.what());
  }
}

void arisim_results_free(arisim_results* results) { delete results; }

}  // extern "C"
