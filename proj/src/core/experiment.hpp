// SPDX-License-Identifier: Apache-2.0
//
// Seeded Monte-Carlo experiment harness: named scenarios sweeping transmit
// power, surface amplification, element spacing, propagated estimation error,
// link distance, or observation angle; JSON configuration with strict key
// checking; parallel trial execution with deterministic aggregation; CSV and
// JSON result emission.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/beamform.hpp"
#include "core/common.hpp"

namespace arisim {

// Fully resolved experiment parameters.  Defaults come from a scenario name
// plus a size profile ("desk" keeps runs interactive, "paper" is the full
// configuration); a JSON config file may override any field.
struct ExperimentConfig {
  std::string scenario;
  std::string profile = "desk";

  // Array geometry (element counts and spacings in wavelengths).
  int surface_nh = 8, surface_nv = 4;
  int base_nh = 4, base_nv = 2;
  int user_nh = 2, user_nv = 1;
  double surface_spacing_wl = 0.05;
  double base_spacing_wl = 0.5;
  double user_spacing_wl = 0.5;

  // Link budget.
  double carrier_hz = 30e9;
  double dist_user_m = 2.6;  // surface to user terminal
  double dist_base_m = 2.2;  // base station to surface
  int paths_iu = 2, paths_bi = 2;
  double pathloss_exponent = 2.1;

  // Uplink training.
  int m_beams = 6;
  int m_configs = 0;  // 0 resolves to 3/4 of the surface element count
  double p_u_dbm = watt_to_dbm(0.005);
  double amp = 7.0;  // per-cell reflection amplitude; budget = amp^2 * cells

  // Estimators.
  std::vector<double> keep_fractions = {0.1, 1.0};
  int sparsity = 5;

  // Beamforming.
  double p_b_dbm = 10.0;
  ScaOptions sca;
  GradientOptions gradient;
  int outer_max_iter = 30;
  double outer_tol = 1e-4;

  // Noise (same spectral density at the base, surface, and user).
  double sigma2_dbm = -95.0;

  // Scattering model of the surface.
  enum class SModel { thin_wire, synthetic, zero };
  SModel s_model = SModel::thin_wire;
  double wire_length_wl = 1.0 / 32.0;
  double wire_radius_wl = 1.0 / 500.0;
  double synthetic_scale = 0.5;
  std::uint64_t synthetic_seed = 12345;

  // Sweep and repetition.
  std::string sweep_variable;
  std::vector<double> sweep_values;
  int trials = 50;
  std::uint64_t seed = 1;

  int surface_size() const { return surface_nh * surface_nv; }
  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  int resolved_m_configs() const;
};

// One aggregated metric row.
struct ResultRecord {
  std::string sweep_variable;
  double sweep_value = 0.0;
  std::string method;
  std::string metric;  // nmse_db, se_bps_hz, wallclock_s_*, noise_power_dbm,
                       // gain_db
  double mean = 0.0;
  double std_dev = 0.0;
  int trials = 0;    // configured trials per point
  int failures = 0;  // trials that threw; excluded from mean/std
};

// Scenario registry.
std::vector<std::string> scenario_names();
bool is_scenario(const std::string& name);
std::string scenario_description(const std::string& name);

// Defaults for a scenario under a profile ("desk" or "paper").  Throws
// config_error for unknown names.
ExperimentConfig scenario_defaults(const std::string& scenario,
                                   const std::string& profile);

// Applies a JSON override document (strict: unknown keys, wrong types, or
// out-of-range values throw config_error).  "scenario" and "profile" keys
// re-resolve the defaults before the remaining overrides apply; the sweep
// variable is fixed by the scenario; a config may replace the sweep values,
// trials, seed, and any physical parameter.
void apply_config_json(ExperimentConfig& cfg, const std::string& json_text);

// Builds a configuration from a self-contained document, which must name its
// scenario ("profile" defaults to `default_profile`).
ExperimentConfig config_from_json(const std::string& json_text,
                                  const std::string& default_profile);

// Final invariant check (positive sizes, nonempty sweep, trials >= 1).
void validate_config(const ExperimentConfig& cfg);

// Runs all sweep points x trials, distributing trials over `workers`
// threads.  Results are aggregated in deterministic order regardless of the
// worker count; per-trial exceptions are recorded as failures.  Records
// carry statistical metrics only, so a fixed config and seed reproduce the
// output byte for byte.
std::vector<ResultRecord> run_scenario(const ExperimentConfig& cfg,
                                       int workers);

// Measures the wall-clock split of each estimator on an estimation scenario:
// sensing-operator construction and dictionary reduction (offline) versus
// per-snapshot sparse recovery (online), averaged over trials.  Only valid
// for nmse-* scenarios; throws config_error otherwise.  Timing records are
// inherently not reproducible byte for byte.
std::vector<ResultRecord> time_phases(const ExperimentConfig& cfg,
                                      int workers);

// Serialization.  CSV columns are exactly
//   sweep_variable,sweep_value,method,metric,mean,std,trials,failures
// with %.17g doubles and LF line endings; identical records serialize to
// identical bytes.
std::string records_to_csv(const std::vector<ResultRecord>& records);
std::string records_to_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_json(const std::string& json_text);

// Writes text to a file, throwing std::runtime_error with the path on
// failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace arisim
