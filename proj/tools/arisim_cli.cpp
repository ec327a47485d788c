// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the shared C API: runs named scenarios,
// lists the registry, and validates JSON config files without running them.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "arisim/arisim.h"

namespace {

struct ConfigDeleter {
  void operator()(arisim_config* cfg) const { arisim_config_free(cfg); }
};
struct ResultsDeleter {
  void operator()(arisim_results* res) const { arisim_results_free(res); }
};
using ConfigPtr = std::unique_ptr<arisim_config, ConfigDeleter>;
using ResultsPtr = std::unique_ptr<arisim_results, ResultsDeleter>;

int fail(const std::string& what) {
  std::cerr << "arisim: " << what;
  const char* detail = arisim_last_error();
  if (detail && *detail) std::cerr << ": " << detail;
  std::cerr << "\n";
  return 1;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

int list_scenarios() {
  const int count = arisim_scenario_count();
  size_t width = 0;
  for (int i = 0; i < count; ++i)
    width = std::max(width, std::strlen(arisim_scenario_name(i)));
  for (int i = 0; i < count; ++i) {
    const char* name = arisim_scenario_name(i);
    std::cout << name << std::string(width - std::strlen(name) + 2, ' ')
              << arisim_scenario_description(name) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "arisim " + std::string(arisim_version()) +
      " - seeded Monte-Carlo studies of an amplifying reconfigurable "
      "surface relaying a MIMO link"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  std::string scenario, config_path, out_path;
  std::string format = "csv", profile = "desk";
  std::uint64_t seed = 0;
  int workers = 1;
  CLI::App* run = app.add_subcommand(
      "run", "Run a scenario and emit aggregated metric records");
  run->add_option("--scenario", scenario,
                  "Scenario name (see list-scenarios)")
      ->required();
  run->add_option("--config", config_path,
                  "JSON overrides; a scenario or profile key in the file "
                  "wins over the flags")
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Output path (defaults to stdout)");
  run->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  run->add_option("--seed", seed,
                  "Master seed (applied last, over any config-file seed)");
  run->add_option("--workers", workers, "Worker threads for the trial grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--profile", profile, "Size profile of the defaults")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();

  // --- list-scenarios ----------------------------------------------------
  CLI::App* list = app.add_subcommand(
      "list-scenarios", "List built-in scenarios with descriptions");

  // --- validate ----------------------------------------------------------
  std::string v_config_path, v_scenario;
  std::string v_profile = "desk";
  CLI::App* validate = app.add_subcommand(
      "validate", "Check a JSON config file without running it");
  validate->add_option("--config", v_config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--scenario", v_scenario,
                       "Scenario to check against (otherwise the file must "
                       "contain a scenario key)");
  validate->add_option("--profile", v_profile, "Size profile of the defaults")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*list) return list_scenarios();

  if (*validate) {
    std::string text;
    if (!read_file(v_config_path, text))
      return fail("cannot read '" + v_config_path + "'");
    ConfigPtr cfg;
    arisim_config* raw = nullptr;
    if (v_scenario.empty()) {
      if (arisim_config_create_from_json(text.c_str(), v_profile.c_str(),
                                         &raw) != ARISIM_OK)
        return fail("invalid config '" + v_config_path + "'");
      cfg.reset(raw);
    } else {
      if (arisim_config_create(v_scenario.c_str(), v_profile.c_str(),
                               &raw) != ARISIM_OK)
        return fail("cannot prepare scenario '" + v_scenario + "'");
      cfg.reset(raw);
      if (arisim_config_apply_json(cfg.get(), text.c_str()) != ARISIM_OK)
        return fail("invalid config '" + v_config_path + "'");
    }
    std::cout << v_config_path << ": valid for scenario '"
              << arisim_config_scenario(cfg.get()) << "' (profile "
              << arisim_config_profile(cfg.get()) << ")\n";
    return 0;
  }

  // run
  ConfigPtr cfg;
  {
    arisim_config* raw = nullptr;
    if (arisim_config_create(scenario.c_str(), profile.c_str(), &raw) !=
        ARISIM_OK)
      return fail("cannot prepare scenario '" + scenario + "'");
    cfg.reset(raw);
  }
  if (!config_path.empty()) {
    std::string text;
    if (!read_file(config_path, text))
      return fail("cannot read '" + config_path + "'");
    if (arisim_config_apply_json(cfg.get(), text.c_str()) != ARISIM_OK)
      return fail("invalid config '" + config_path + "'");
  }
  if (run->count("--seed") > 0 &&
      arisim_config_set_seed(cfg.get(), seed) != ARISIM_OK)
    return fail("cannot set seed");

  ResultsPtr results;
  {
    arisim_results* raw = nullptr;
    if (arisim_run(cfg.get(), workers, &raw) != ARISIM_OK)
      return fail("run failed");
    results.reset(raw);
  }

  const arisim_format fmt =
      format == "csv" ? ARISIM_FORMAT_CSV : ARISIM_FORMAT_JSON;
  if (out_path.empty()) {
    std::cout << (fmt == ARISIM_FORMAT_CSV
                      ? arisim_results_csv(results.get())
                      : arisim_results_json(results.get()));
  } else {
    if (arisim_results_write(results.get(), out_path.c_str(), fmt) !=
        ARISIM_OK)
      return fail("cannot write '" + out_path + "'");
    std::cout << "wrote " << arisim_results_count(results.get())
              << " records to " << out_path << "\n";
  }
  return 0;
}
