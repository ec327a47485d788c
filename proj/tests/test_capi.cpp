// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through the extern-C surface only: no core
// headers, just arisim.h, the way an FFI consumer would bind it.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "arisim/arisim.h"

namespace {

const char* kTinyOverrides = R"({
  "trials": 2,
  "sweep": {"variable": "p_u_dbm", "values": [0.0, 24.0]},
  "geometry": {"surface": [4, 2], "base": [2, 1], "user": [1, 1]},
  "estimator": {"keep_fractions": [0.5, 1.0], "sparsity": 3}
})";

arisim_config* make_tiny_config() {
  arisim_config* cfg = nullptr;
  REQUIRE(arisim_config_create("nmse-vs-power", "desk", &cfg) == ARISIM_OK);
  REQUIRE(cfg != nullptr);
  REQUIRE(arisim_config_apply_json(cfg, kTinyOverrides) == ARISIM_OK);
  return cfg;
}

}  // namespace

TEST_CASE("version and scenario registry") {
  const char* version = arisim_version();
  REQUIRE(version != nullptr);
  CHECK(std::strlen(version) >= 5);

  const int count = arisim_scenario_count();
  CHECK(count == 9);
  for (int i = 0; i < count; ++i) {
    const char* name = arisim_scenario_name(i);
    REQUIRE(name != nullptr);
    const char* description = arisim_scenario_description(name);
    REQUIRE(description != nullptr);
    CHECK(std::strlen(description) > 0);
  }
  CHECK(arisim_scenario_name(-1) == nullptr);
  CHECK(arisim_scenario_name(count) == nullptr);
  CHECK(arisim_scenario_description("bogus") == nullptr);
  CHECK(arisim_scenario_description(nullptr) == nullptr);
  CHECK(std::string(arisim_scenario_name(0)) == "nmse-vs-power");
}

TEST_CASE("configuration lifecycle and error reporting") {
  arisim_config* cfg = nullptr;
  CHECK(arisim_config_create("bogus", "desk", &cfg) == ARISIM_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::strlen(arisim_last_error()) > 0);

  CHECK(arisim_config_create(nullptr, "desk", &cfg) ==
        ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_config_create("nmse-vs-power", "huge", &cfg) ==
        ARISIM_ERR_CONFIG);

  REQUIRE(arisim_config_create("nmse-vs-power", "desk", &cfg) == ARISIM_OK);
  // A successful call clears the thread's error message.
  CHECK(std::strlen(arisim_last_error()) == 0);

  // Rejected documents leave the configuration usable.
  CHECK(arisim_config_apply_json(cfg, R"({"trails": 1})") ==
        ARISIM_ERR_CONFIG);
  CHECK(std::strlen(arisim_last_error()) > 0);
  CHECK(arisim_config_apply_json(cfg, "{") == ARISIM_ERR_CONFIG);
  CHECK(arisim_config_apply_json(cfg, nullptr) ==
        ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_config_validate(cfg) == ARISIM_OK);

  CHECK(arisim_config_apply_json(cfg, R"({"trials": 4})") == ARISIM_OK);
  CHECK(arisim_config_set_seed(cfg, 7) == ARISIM_OK);
  CHECK(arisim_config_set_seed(nullptr, 7) == ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_config_validate(nullptr) == ARISIM_ERR_INVALID_ARGUMENT);

  arisim_config_free(cfg);
  arisim_config_free(nullptr);  // must be a no-op
}

TEST_CASE("self-contained documents build configurations") {
  arisim_config* cfg = nullptr;
  REQUIRE(arisim_config_create_from_json(
              R"({"scenario": "se-vs-power", "trials": 3})", nullptr,
              &cfg) == ARISIM_OK);
  CHECK(arisim_config_validate(cfg) == ARISIM_OK);
  CHECK(std::string(arisim_config_scenario(cfg)) == "se-vs-power");
  CHECK(std::string(arisim_config_profile(cfg)) == "desk");
  CHECK(arisim_config_scenario(nullptr) == nullptr);
  CHECK(arisim_config_profile(nullptr) == nullptr);
  arisim_config_free(cfg);

  cfg = nullptr;
  CHECK(arisim_config_create_from_json(R"({"trials": 3})", "desk", &cfg) ==
        ARISIM_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::strlen(arisim_last_error()) > 0);
  CHECK(arisim_config_create_from_json(nullptr, "desk", &cfg) ==
        ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_config_create_from_json(R"({"scenario": "bad"})", "desk",
                                       nullptr) ==
        ARISIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("running a scenario yields readable records") {
  arisim_config* cfg = make_tiny_config();
  arisim_results* results = nullptr;
  REQUIRE(arisim_run(cfg, 2, &results) == ARISIM_OK);
  REQUIRE(results != nullptr);

  // 2 sweep points x 4 methods.
  REQUIRE(arisim_results_count(results) == 8);
  bool saw_mc_aware = false;
  for (size_t i = 0; i < arisim_results_count(results); ++i) {
    arisim_record_view view;
    REQUIRE(arisim_results_get(results, i, &view) == ARISIM_OK);
    CHECK(std::string(view.sweep_variable) == "p_u_dbm");
    CHECK(std::string(view.metric) == "nmse_db");
    CHECK(view.trials == 2);
    CHECK(view.failures == 0);
    CHECK(view.std_dev >= 0.0);
    if (std::string(view.method) == "mc-aware") saw_mc_aware = true;
  }
  CHECK(saw_mc_aware);

  arisim_record_view view;
  CHECK(arisim_results_get(results, 8, &view) ==
        ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_results_get(results, 0, nullptr) ==
        ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_results_get(nullptr, 0, &view) ==
        ARISIM_ERR_INVALID_ARGUMENT);

  const char* csv = arisim_results_csv(results);
  REQUIRE(csv != nullptr);
  CHECK(std::string(csv).rfind(
            "sweep_variable,sweep_value,method,metric,mean,std,trials,"
            "failures\n",
            0) == 0);
  const char* json = arisim_results_json(results);
  REQUIRE(json != nullptr);
  CHECK(std::string(json).find("\"records\"") != std::string::npos);

  arisim_results_free(results);
  arisim_config_free(cfg);
}

TEST_CASE("identical configs reproduce identical bytes") {
  arisim_config* cfg = make_tiny_config();
  arisim_results* first = nullptr;
  arisim_results* second = nullptr;
  REQUIRE(arisim_run(cfg, 1, &first) == ARISIM_OK);
  REQUIRE(arisim_run(cfg, 3, &second) == ARISIM_OK);
  CHECK(std::string(arisim_results_csv(first)) ==
        std::string(arisim_results_csv(second)));
  arisim_results_free(second);

  // Reseeding changes the numbers.
  REQUIRE(arisim_config_set_seed(cfg, 99) == ARISIM_OK);
  REQUIRE(arisim_run(cfg, 1, &second) == ARISIM_OK);
  CHECK(std::string(arisim_results_csv(first)) !=
        std::string(arisim_results_csv(second)));

  arisim_results_free(first);
  arisim_results_free(second);
  arisim_config_free(cfg);
}

TEST_CASE("results can be written to disk") {
  arisim_config* cfg = make_tiny_config();
  arisim_results* results = nullptr;
  REQUIRE(arisim_run(cfg, 1, &results) == ARISIM_OK);

  const std::string path = "/tmp/arisim_capi_out.csv";
  REQUIRE(arisim_results_write(results, path.c_str(), ARISIM_FORMAT_CSV) ==
          ARISIM_OK);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == arisim_results_csv(results));
  std::remove(path.c_str());

  CHECK(arisim_results_write(results, "/nonexistent-dir/x.csv",
                             ARISIM_FORMAT_CSV) == ARISIM_ERR_IO);
  CHECK(std::strlen(arisim_last_error()) > 0);
  CHECK(arisim_results_write(results, path.c_str(), arisim_format(42)) ==
        ARISIM_ERR_INVALID_ARGUMENT);
  CHECK(arisim_results_write(nullptr, path.c_str(), ARISIM_FORMAT_CSV) ==
        ARISIM_ERR_INVALID_ARGUMENT);

  arisim_results_free(results);
  arisim_results_free(nullptr);  // must be a no-op
  arisim_config_free(cfg);
}

TEST_CASE("phase timing is exposed and guarded") {
  arisim_config* cfg = make_tiny_config();
  arisim_results* results = nullptr;
  REQUIRE(arisim_time_phases(cfg, 1, &results) == ARISIM_OK);
  // 2 sweep points x 4 methods x 2 phases.
  CHECK(arisim_results_count(results) == 16);
  bool saw_offline = false, saw_online = false;
  for (size_t i = 0; i < arisim_results_count(results); ++i) {
    arisim_record_view view;
    REQUIRE(arisim_results_get(results, i, &view) == ARISIM_OK);
    CHECK(view.mean >= 0.0);
    if (std::string(view.metric) == "wallclock_s_offline") saw_offline = true;
    if (std::string(view.metric) == "wallclock_s_online") saw_online = true;
  }
  CHECK(saw_offline);
  CHECK(saw_online);
  arisim_results_free(results);
  arisim_config_free(cfg);

  // Timing a beamforming scenario is rejected.
  REQUIRE(arisim_config_create("se-vs-power", "desk", &cfg) == ARISIM_OK);
  CHECK(arisim_time_phases(cfg, 1, &results) == ARISIM_ERR_CONFIG);
  CHECK(results == nullptr);
  arisim_config_free(cfg);
}
