// SPDX-License-Identifier: Apache-2.0

#include "core/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "core/channel.hpp"
#include "core/coupling.hpp"
#include "core/dictionary.hpp"
#include "core/estimate.hpp"
#include "core/training.hpp"

namespace arisim {

using nlohmann::json;

int ExperimentConfig::resolved_m_configs() const {
  if (m_configs > 0) return m_configs;
  return int(std::llround(0.75 * double(surface_size())));
}

// ---------------------------------------------------------------------------
// Scenario registry.
// ---------------------------------------------------------------------------

namespace {

struct ScenarioInfo {
  const char* name;
  const char* description;
};

const ScenarioInfo kScenarios[] = {
    {"nmse-vs-power",
     "Channel-estimation NMSE versus uplink pilot power (dBm)"},
    {"nmse-vs-amp",
     "Channel-estimation NMSE versus per-cell surface amplification"},
    {"nmse-vs-spacing",
     "Channel-estimation NMSE versus surface element spacing (wavelengths)"},
    {"nmse-vs-errvar",
     "Two-stage estimator NMSE versus propagated stage-two error variance "
     "(dBm)"},
    {"se-vs-power",
     "Downlink spectral efficiency versus base transmit power (dBm)"},
    {"se-vs-amp",
     "Downlink spectral efficiency versus per-cell surface amplification"},
    {"se-vs-spacing",
     "Downlink spectral efficiency versus surface element spacing "
     "(wavelengths)"},
    {"noise-power-check",
     "Noise powers received at the user versus surface distance in Rayleigh "
     "distances"},
    {"beam-pattern",
     "Reflected beam pattern versus observation azimuth, with and without "
     "coupling"},
};

const ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : kScenarios)
    if (name == s.name) return &s;
  return nullptr;
}

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& s : kScenarios) names.emplace_back(s.name);
  return names;
}

bool is_scenario(const std::string& name) {
  return find_scenario(name) != nullptr;
}

std::string scenario_description(const std::string& name) {
  const ScenarioInfo* info = find_scenario(name);
  if (!info) throw config_error("unknown scenario '" + name + "'");
  return info->description;
}

ExperimentConfig scenario_defaults(const std::string& scenario,
                                   const std::string& profile) {
  if (!is_scenario(scenario))
    throw config_error("unknown scenario '" + scenario + "'");
  if (profile != "desk" && profile != "paper")
    throw config_error("unknown profile '" + profile + "' (desk or paper)");
  const bool paper = profile == "paper";

  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.profile = profile;
  cfg.surface_nh = paper ? 16 : 8;
  cfg.surface_nv = paper ? 8 : 4;
  cfg.trials = paper ? 100 : 50;

  if (starts_with(scenario, "se-")) {
    // Beamforming studies use a single dominant path per hop and a sparser
    // surface so the coupled response stays well conditioned at high gain.
    cfg.surface_spacing_wl = 0.1;
    cfg.paths_iu = 1;
    cfg.paths_bi = 1;
  }

  if (scenario == "nmse-vs-power") {
    cfg.sweep_variable = "p_u_dbm";
    cfg.sweep_values = paper
                           ? std::vector<double>{0, 4, 8, 12, 16, 20}
                           : std::vector<double>{0, 12, 24};
  } else if (scenario == "nmse-vs-amp") {
    cfg.sweep_variable = "amp";
    cfg.sweep_values = paper ? std::vector<double>{2, 4, 6, 8, 10}
                             : std::vector<double>{2, 6, 10};
  } else if (scenario == "nmse-vs-spacing") {
    cfg.sweep_variable = "spacing_wavelengths";
    cfg.sweep_values = {0.02, 0.05, 0.1, 0.5};
  } else if (scenario == "nmse-vs-errvar") {
    cfg.sweep_variable = "err_var_dbm";
    cfg.sweep_values = paper
                           ? std::vector<double>{-130, -120, -110, -100, -90}
                           : std::vector<double>{-130, -110, -90};
  } else if (scenario == "se-vs-power") {
    cfg.sweep_variable = "p_b_dbm";
    cfg.sweep_values = paper
                           ? std::vector<double>{-10, -5, 0, 5, 10, 15, 20}
                           : std::vector<double>{-10, 5, 20};
  } else if (scenario == "se-vs-amp") {
    cfg.sweep_variable = "amp";
    cfg.sweep_values = paper ? std::vector<double>{2, 4, 6, 8, 10}
                             : std::vector<double>{2, 6, 10};
  } else if (scenario == "se-vs-spacing") {
    cfg.sweep_variable = "spacing_wavelengths";
    cfg.sweep_values = {0.02, 0.05, 0.1, 0.5};
  } else if (scenario == "noise-power-check") {
    cfg.sweep_variable = "rayleigh_multiple";
    cfg.sweep_values = {0.25, 0.5, 1, 2, 4};
    cfg.surface_nh = 10;
    cfg.surface_nv = 10;
    cfg.surface_spacing_wl = 0.5;
    cfg.user_nh = 2;
    cfg.user_nv = 2;
    cfg.paths_iu = 1;
    cfg.s_model = ExperimentConfig::SModel::zero;
  } else if (scenario == "beam-pattern") {
    cfg.sweep_variable = "azimuth_rad";
    cfg.sweep_values.clear();
    const int n_points = 61;
    for (int i = 0; i < n_points; ++i)
      cfg.sweep_values.push_back(kPi * double(i) / double(n_points - 1));
    cfg.trials = 1;
    cfg.amp = 2.0;
    cfg.s_model = ExperimentConfig::SModel::synthetic;
    cfg.synthetic_scale = 0.2;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// JSON configuration.
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_fail(const std::string& msg) {
  throw config_error(msg);
}

void expect_keys(const json& obj, const char* where,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    config_fail(std::string(where) + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      config_fail("unknown key '" + it.key() + "' in " + where);
  }
}

double read_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) config_fail(std::string(key) + " must be a number");
  return v.get<double>();
}

int read_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    config_fail(std::string(key) + " must be an integer");
  return v.get<int>();
}

std::uint64_t read_u64(const json& obj, const char* key,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    config_fail(std::string(key) + " must be a non-negative integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    config_fail(std::string(key) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string read_string(const json& obj, const char* key,
                        const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) config_fail(std::string(key) + " must be a string");
  return v.get<std::string>();
}

void read_array_pair(const json& obj, const char* key, int& nh, int& nv) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    config_fail(std::string(key) + " must be an array [nh, nv] of integers");
  nh = v[0].get<int>();
  nv = v[1].get<int>();
}

std::vector<double> read_number_list(const json& obj, const char* key,
                                     std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty())
    config_fail(std::string(key) + " must be a nonempty array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number())
      config_fail(std::string(key) + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

void apply_config_json(ExperimentConfig& cfg, const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_fail(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(root, "the config",
              {"scenario", "profile", "trials", "seed", "sweep", "geometry",
               "link", "training", "estimator", "beamformer", "noise",
               "s_model"});

  const std::string scenario = read_string(root, "scenario", cfg.scenario);
  const std::string profile = read_string(root, "profile", cfg.profile);
  if (scenario != cfg.scenario || profile != cfg.profile) {
    // Re-resolve scenario defaults under the requested name and profile,
    // then apply the remaining overrides on top.
    cfg = scenario_defaults(scenario, profile);
  }
  cfg.trials = read_int(root, "trials", cfg.trials);
  cfg.seed = read_u64(root, "seed", cfg.seed);

  if (root.contains("sweep")) {
    const json& sweep = root.at("sweep");
    expect_keys(sweep, "sweep", {"variable", "values"});
    const std::string var =
        read_string(sweep, "variable", cfg.sweep_variable);
    if (var != cfg.sweep_variable)
      config_fail("sweep variable '" + var + "' does not match scenario '" +
                  cfg.scenario + "' (expects '" + cfg.sweep_variable + "')");
    cfg.sweep_values = read_number_list(sweep, "values", cfg.sweep_values);
  }

  if (root.contains("geometry")) {
    const json& g = root.at("geometry");
    expect_keys(g, "geometry",
                {"surface", "base", "user", "surface_spacing_wavelengths",
                 "base_spacing_wavelengths", "user_spacing_wavelengths"});
    read_array_pair(g, "surface", cfg.surface_nh, cfg.surface_nv);
    read_array_pair(g, "base", cfg.base_nh, cfg.base_nv);
    read_array_pair(g, "user", cfg.user_nh, cfg.user_nv);
    cfg.surface_spacing_wl =
        read_number(g, "surface_spacing_wavelengths", cfg.surface_spacing_wl);
    cfg.base_spacing_wl =
        read_number(g, "base_spacing_wavelengths", cfg.base_spacing_wl);
    cfg.user_spacing_wl =
        read_number(g, "user_spacing_wavelengths", cfg.user_spacing_wl);
  }

  if (root.contains("link")) {
    const json& l = root.at("link");
    expect_keys(l, "link",
                {"carrier_ghz", "dist_user_m", "dist_base_m", "paths_iu",
                 "paths_bi", "pathloss_exponent"});
    cfg.carrier_hz =
        read_number(l, "carrier_ghz", cfg.carrier_hz / 1e9) * 1e9;
    cfg.dist_user_m = read_number(l, "dist_user_m", cfg.dist_user_m);
    cfg.dist_base_m = read_number(l, "dist_base_m", cfg.dist_base_m);
    cfg.paths_iu = read_int(l, "paths_iu", cfg.paths_iu);
    cfg.paths_bi = read_int(l, "paths_bi", cfg.paths_bi);
    cfg.pathloss_exponent =
        read_number(l, "pathloss_exponent", cfg.pathloss_exponent);
  }

  if (root.contains("training")) {
    const json& t = root.at("training");
    expect_keys(t, "training", {"m_beams", "m_configs", "p_u_dbm", "amp"});
    cfg.m_beams = read_int(t, "m_beams", cfg.m_beams);
    cfg.m_configs = read_int(t, "m_configs", cfg.m_configs);
    cfg.p_u_dbm = read_number(t, "p_u_dbm", cfg.p_u_dbm);
    cfg.amp = read_number(t, "amp", cfg.amp);
  }

  if (root.contains("estimator")) {
    const json& e = root.at("estimator");
    expect_keys(e, "estimator", {"keep_fractions", "sparsity"});
    cfg.keep_fractions =
        read_number_list(e, "keep_fractions", cfg.keep_fractions);
    cfg.sparsity = read_int(e, "sparsity", cfg.sparsity);
  }

  if (root.contains("beamformer")) {
    const json& b = root.at("beamformer");
    expect_keys(b, "beamformer",
                {"p_b_dbm", "sca_max_iter", "sca_tol", "outer_max_iter",
                 "outer_tol", "gd_step_scale", "gd_max_iter"});
    cfg.p_b_dbm = read_number(b, "p_b_dbm", cfg.p_b_dbm);
    cfg.sca.max_iter = read_int(b, "sca_max_iter", cfg.sca.max_iter);
    cfg.sca.conv_tol = read_number(b, "sca_tol", cfg.sca.conv_tol);
    cfg.outer_max_iter = read_int(b, "outer_max_iter", cfg.outer_max_iter);
    cfg.outer_tol = read_number(b, "outer_tol", cfg.outer_tol);
    cfg.gradient.step_scale =
        read_number(b, "gd_step_scale", cfg.gradient.step_scale);
    cfg.gradient.max_iter = read_int(b, "gd_max_iter", cfg.gradient.max_iter);
  }

  if (root.contains("noise")) {
    const json& n = root.at("noise");
    expect_keys(n, "noise", {"sigma2_dbm"});
    cfg.sigma2_dbm = read_number(n, "sigma2_dbm", cfg.sigma2_dbm);
  }

  if (root.contains("s_model")) {
    const json& s = root.at("s_model");
    expect_keys(s, "s_model",
                {"kind", "wire_length_wavelengths", "wire_radius_wavelengths",
                 "synthetic_scale", "synthetic_seed"});
    const std::string kind = read_string(
        s, "kind",
        cfg.s_model == ExperimentConfig::SModel::thin_wire ? "thin-wire"
        : cfg.s_model == ExperimentConfig::SModel::synthetic ? "synthetic"
                                                             : "zero");
    if (kind == "thin-wire")
      cfg.s_model = ExperimentConfig::SModel::thin_wire;
    else if (kind == "synthetic")
      cfg.s_model = ExperimentConfig::SModel::synthetic;
    else if (kind == "zero")
      cfg.s_model = ExperimentConfig::SModel::zero;
    else
      config_fail("s_model.kind must be thin-wire, synthetic, or zero");
    cfg.wire_length_wl =
        read_number(s, "wire_length_wavelengths", cfg.wire_length_wl);
    cfg.wire_radius_wl =
        read_number(s, "wire_radius_wavelengths", cfg.wire_radius_wl);
    cfg.synthetic_scale =
        read_number(s, "synthetic_scale", cfg.synthetic_scale);
    cfg.synthetic_seed = read_u64(s, "synthetic_seed", cfg.synthetic_seed);
  }

  validate_config(cfg);
}

ExperimentConfig config_from_json(const std::string& json_text,
                                  const std::string& default_profile) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("scenario"))
    config_fail("a standalone config must name its scenario");
  const std::string scenario = read_string(root, "scenario", "");
  const std::string profile = read_string(root, "profile", default_profile);
  ExperimentConfig cfg = scenario_defaults(scenario, profile);
  apply_config_json(cfg, json_text);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!is_scenario(cfg.scenario))
    config_fail("unknown scenario '" + cfg.scenario + "'");
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) config_fail(std::string(what) + " must be positive");
  };
  auto at_least_one = [](int v, const char* what) {
    if (v < 1) config_fail(std::string(what) + " must be at least 1");
  };
  at_least_one(cfg.surface_nh, "surface nh");
  at_least_one(cfg.surface_nv, "surface nv");
  at_least_one(cfg.base_nh, "base nh");
  at_least_one(cfg.base_nv, "base nv");
  at_least_one(cfg.user_nh, "user nh");
  at_least_one(cfg.user_nv, "user nv");
  positive(cfg.surface_spacing_wl, "surface spacing");
  positive(cfg.base_spacing_wl, "base spacing");
  positive(cfg.user_spacing_wl, "user spacing");
  positive(cfg.carrier_hz, "carrier frequency");
  positive(cfg.dist_user_m, "user distance");
  positive(cfg.dist_base_m, "base distance");
  at_least_one(cfg.paths_iu, "paths_iu");
  at_least_one(cfg.paths_bi, "paths_bi");
  positive(cfg.pathloss_exponent, "pathloss exponent");
  at_least_one(cfg.m_beams, "m_beams");
  if (cfg.m_configs < 0) config_fail("m_configs must be non-negative");
  positive(cfg.amp, "amplification");
  if (cfg.keep_fractions.empty())
    config_fail("keep_fractions must be nonempty");
  for (double rho : cfg.keep_fractions)
    if (!(rho > 0.0 && rho <= 1.0))
      config_fail("keep fractions must lie in (0, 1]");
  at_least_one(cfg.sparsity, "sparsity");
  at_least_one(cfg.sca.max_iter, "sca_max_iter");
  positive(cfg.sca.conv_tol, "sca_tol");
  at_least_one(cfg.outer_max_iter, "outer_max_iter");
  positive(cfg.outer_tol, "outer_tol");
  positive(cfg.gradient.step_scale, "gd_step_scale");
  at_least_one(cfg.gradient.max_iter, "gd_max_iter");
  positive(cfg.wire_length_wl, "wire length");
  positive(cfg.wire_radius_wl, "wire radius");
  positive(cfg.synthetic_scale, "synthetic scale");
  if (cfg.sweep_values.empty()) config_fail("sweep values must be nonempty");
  at_least_one(cfg.trials, "trials");
}

// ---------------------------------------------------------------------------
// Parallel trial grid.
// ---------------------------------------------------------------------------

namespace {

struct TrialOutcome {
  std::vector<double> values;
  bool ok = false;
};

using TrialFn =
    std::function<std::vector<double>(int point, int trial, std::uint64_t)>;

std::vector<std::vector<TrialOutcome>> run_grid(int n_points, int trials,
                                                int workers,
                                                std::uint64_t master_seed,
                                                const TrialFn& fn) {
  std::vector<std::vector<TrialOutcome>> slots(
      n_points, std::vector<TrialOutcome>(size_t(trials)));
  const long total = long(n_points) * trials;
  std::atomic<long> next{0};
  auto drain = [&]() {
    for (;;) {
      const long task = next.fetch_add(1);
      if (task >= total) return;
      const int point = int(task / trials);
      const int trial = int(task % trials);
      TrialOutcome& out = slots[size_t(point)][size_t(trial)];
      try {
        out.values = fn(point, trial,
                        derive_seed(master_seed, std::uint64_t(point),
                                    std::uint64_t(trial)));
        out.ok = true;
      } catch (const std::exception&) {
        out.ok = false;
      }
    }
  };
  if (workers <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
  }
  return slots;
}

using Columns = std::vector<std::pair<std::string, std::string>>;

std::vector<ResultRecord> aggregate(
    const ExperimentConfig& cfg, const Columns& columns,
    const std::vector<std::vector<TrialOutcome>>& slots) {
  std::vector<ResultRecord> records;
  for (size_t p = 0; p < slots.size(); ++p) {
    int failures = 0;
    for (const TrialOutcome& t : slots[p])
      if (!t.ok) ++failures;
    for (size_t k = 0; k < columns.size(); ++k) {
      ResultRecord rec;
      rec.sweep_variable = cfg.sweep_variable;
      rec.sweep_value = cfg.sweep_values[p];
      rec.method = columns[k].first;
      rec.metric = columns[k].second;
      rec.trials = cfg.trials;
      rec.failures = failures;
      std::vector<double> vals;
      for (const TrialOutcome& t : slots[p])
        if (t.ok) vals.push_back(t.values[k]);
      if (!vals.empty()) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        rec.mean = sum / double(vals.size());
        if (vals.size() > 1) {
          double ss = 0.0;
          for (double v : vals) ss += (v - rec.mean) * (v - rec.mean);
          rec.std_dev = std::sqrt(ss / double(vals.size() - 1));
        }
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

UpaGeometry make_geometry(int nh, int nv, double spacing_wl,
                          double wavelength) {
  UpaGeometry g;
  g.nh = nh;
  g.nv = nv;
  g.spacing = spacing_wl * wavelength;
  return g;
}

arma::cx_mat build_scattering(const ExperimentConfig& cfg,
                              const UpaGeometry& surface, double wavelength) {
  switch (cfg.s_model) {
    case ExperimentConfig::SModel::thin_wire: {
      WireCouplingParams params;
      params.wavelength = wavelength;
      params.total_length = cfg.wire_length_wl * wavelength;
      params.radius = cfg.wire_radius_wl * wavelength;
      return thin_wire_scattering(surface.nh, surface.nv, surface.spacing,
                                  params);
    }
    case ExperimentConfig::SModel::synthetic: {
      Rng rng(cfg.synthetic_seed);
      return cfg.synthetic_scale *
             synthetic_scattering(surface.size(), rng);
    }
    case ExperimentConfig::SModel::zero:
    default:
      return arma::cx_mat(arma::uword(surface.size()),
                          arma::uword(surface.size()), arma::fill::zeros);
  }
}

LinkConfig make_link(const ExperimentConfig& cfg, const UpaGeometry& surface,
                     const UpaGeometry& base, const UpaGeometry& user,
                     double wavelength) {
  LinkConfig link;
  link.surface = surface;
  link.base = base;
  link.user = user;
  link.wavelength = wavelength;
  link.dist_iu = cfg.dist_user_m;
  link.dist_bi = cfg.dist_base_m;
  link.paths_iu = cfg.paths_iu;
  link.paths_bi = cfg.paths_bi;
  link.pathloss_exponent = cfg.pathloss_exponent;
  return link;
}

// Applies one sweep value to a copy of the config; `stage2_var` receives the
// propagated-error variance for the errvar scenario.
ExperimentConfig point_config(const ExperimentConfig& cfg, double value,
                              double* stage2_var) {
  ExperimentConfig c = cfg;
  if (c.sweep_variable == "p_u_dbm")
    c.p_u_dbm = value;
  else if (c.sweep_variable == "p_b_dbm")
    c.p_b_dbm = value;
  else if (c.sweep_variable == "amp")
    c.amp = value;
  else if (c.sweep_variable == "spacing_wavelengths")
    c.surface_spacing_wl = value;
  else if (c.sweep_variable == "err_var_dbm" && stage2_var)
    *stage2_var = dbm_to_watt(value);
  return c;
}

std::string rho_label(double rho) {
  return "proposed-rho-" + format_short(rho);
}

// ---------------------------------------------------------------------------
// Estimation scenarios.
// ---------------------------------------------------------------------------

struct EstPointContext {
  ExperimentConfig cfg;
  UpaGeometry surface, base, user;
  double wavelength = 0.0;
  arma::cx_mat s;
  Dictionaries dicts;
  double stage2_var = 0.0;
};

// Runs every estimator on one synthetic training snapshot.  `timing` selects
// the emitted values: reconstruction NMSE in dB, or the offline/online
// wall-clock seconds of each estimator.
std::vector<double> estimation_trial(const EstPointContext& ctx,
                                     std::uint64_t seed, bool timing) {
  const ExperimentConfig& c = ctx.cfg;
  Rng rng(seed);
  const TwoHopChannel ch = draw_two_hop(
      make_link(c, ctx.surface, ctx.base, ctx.user, ctx.wavelength), rng);
  const TrainingPlan plan = make_training_plan(
      ctx.user.size(), ctx.base.size(), ctx.surface.size(), c.m_beams,
      c.resolved_m_configs(), dbm_to_watt(c.p_u_dbm), c.amp, rng);
  const arma::cx_cube responses = config_responses(plan, ctx.s);
  const arma::cx_mat clean =
      receive_training(plan, ch.h_bi, ch.h_iu, responses, 0.0, 0.0, nullptr);
  Rng noise_rng(derive_seed(seed, 1, 0));
  const double sigma2 = dbm_to_watt(c.sigma2_dbm);
  const arma::cx_mat y = receive_training(plan, ch.h_bi, ch.h_iu, responses,
                                          sigma2, sigma2, &noise_rng);

  std::vector<double> out;
  auto push = [&](const ChannelEstimate& est, const arma::cx_cube* resp) {
    if (timing) {
      out.push_back(est.offline_seconds);
      out.push_back(est.online_seconds);
    } else {
      out.push_back(reconstruction_nmse_db(
          predict_measurements(est, plan, ctx.dicts, resp), clean));
    }
  };

  push(estimate_unaware(y, plan, ctx.dicts, c.sparsity), nullptr);
  for (size_t k = 0; k < c.keep_fractions.size(); ++k) {
    Rng stage2_rng(derive_seed(seed, 2, std::uint64_t(k)));
    Rng* perturb = ctx.stage2_var > 0.0 ? &stage2_rng : nullptr;
    push(estimate_two_stage(y, plan, ctx.dicts, responses,
                            c.keep_fractions[k], c.sparsity, ctx.stage2_var,
                            perturb),
         &responses);
  }
  push(estimate_exact(y, plan, ctx.dicts, responses, c.sparsity), &responses);
  return out;
}

std::vector<std::string> estimation_methods(const ExperimentConfig& cfg) {
  std::vector<std::string> methods;
  methods.emplace_back("mc-unaware");
  for (double rho : cfg.keep_fractions) methods.push_back(rho_label(rho));
  methods.emplace_back("mc-aware");
  return methods;
}

std::vector<EstPointContext> estimation_points(const ExperimentConfig& cfg);

std::vector<ResultRecord> run_estimation_grid(const ExperimentConfig& cfg,
                                              int workers, bool timing) {
  Columns columns;
  for (const std::string& method : estimation_methods(cfg)) {
    if (timing) {
      columns.emplace_back(method, "wallclock_s_offline");
      columns.emplace_back(method, "wallclock_s_online");
    } else {
      columns.emplace_back(method, "nmse_db");
    }
  }
  const std::vector<EstPointContext> points = estimation_points(cfg);
  const auto slots =
      run_grid(int(points.size()), cfg.trials, workers, cfg.seed,
               [&](int point, int, std::uint64_t seed) {
                 return estimation_trial(points[size_t(point)], seed, timing);
               });
  return aggregate(cfg, columns, slots);
}

std::vector<EstPointContext> estimation_points(const ExperimentConfig& cfg) {
  std::vector<EstPointContext> points;
  for (double value : cfg.sweep_values) {
    EstPointContext ctx;
    ctx.stage2_var = 0.0;
    ctx.cfg = point_config(cfg, value, &ctx.stage2_var);
    ctx.wavelength = ctx.cfg.wavelength();
    ctx.surface = make_geometry(ctx.cfg.surface_nh, ctx.cfg.surface_nv,
                                ctx.cfg.surface_spacing_wl, ctx.wavelength);
    ctx.base = make_geometry(ctx.cfg.base_nh, ctx.cfg.base_nv,
                             ctx.cfg.base_spacing_wl, ctx.wavelength);
    ctx.user = make_geometry(ctx.cfg.user_nh, ctx.cfg.user_nv,
                             ctx.cfg.user_spacing_wl, ctx.wavelength);
    ctx.s = build_scattering(ctx.cfg, ctx.surface, ctx.wavelength);
    ctx.dicts =
        build_dictionaries(ctx.user, ctx.base, ctx.surface, ctx.wavelength);
    points.push_back(std::move(ctx));
  }
  return points;
}

// ---------------------------------------------------------------------------
// Spectral-efficiency scenarios.
// ---------------------------------------------------------------------------

struct SePointContext {
  ExperimentConfig cfg;
  UpaGeometry surface, base, user;
  double wavelength = 0.0;
  arma::cx_mat s;
  Dictionaries dicts;
};

std::vector<double> se_trial(const SePointContext& ctx, std::uint64_t seed) {
  const ExperimentConfig& c = ctx.cfg;
  const arma::uword n_user = arma::uword(ctx.user.size());
  const arma::uword n_base = arma::uword(ctx.base.size());
  const arma::uword n_cells = arma::uword(ctx.surface.size());
  const double p_b = dbm_to_watt(c.p_b_dbm);
  const double sigma2 = dbm_to_watt(c.sigma2_dbm);
  const double budget = c.amp * c.amp * double(n_cells);

  Rng rng(seed);
  const TwoHopChannel ch = draw_two_hop(
      make_link(c, ctx.surface, ctx.base, ctx.user, ctx.wavelength), rng);

  // Ground-truth equivalent channels.
  const arma::cx_mat g_true_mc = downlink_equivalent_exact(ch.h_bi, ch.h_iu);
  const arma::cx_mat g_true_cv =
      downlink_equivalent_conventional(ch.h_bi, ch.h_iu);

  // Estimated equivalent channels from one uplink training pass.
  const TrainingPlan plan = make_training_plan(
      int(n_user), int(n_base), int(n_cells), c.m_beams,
      c.resolved_m_configs(), dbm_to_watt(c.p_u_dbm), c.amp, rng);
  const arma::cx_cube responses = config_responses(plan, ctx.s);
  Rng noise_rng(derive_seed(seed, 1, 0));
  const arma::cx_mat y = receive_training(plan, ch.h_bi, ch.h_iu, responses,
                                          sigma2, sigma2, &noise_rng);
  const ChannelEstimate est_cv =
      estimate_unaware(y, plan, ctx.dicts, c.sparsity);
  const double rho = c.keep_fractions.front();
  const ChannelEstimate est_mc = estimate_two_stage(
      y, plan, ctx.dicts, responses, rho, c.sparsity);
  const arma::cx_mat g_est_cv = ul_to_dl_equivalent(
      equivalent_channel(est_cv, ctx.dicts), n_user, n_base, n_cells);
  const arma::cx_mat g_est_mc = ul_to_dl_equivalent(
      equivalent_channel(est_mc, ctx.dicts), n_user, n_base, n_cells);

  JointOptions opt;
  opt.outer_max_iter = c.outer_max_iter;
  opt.outer_tol = c.outer_tol;
  opt.sca = c.sca;
  opt.gradient = c.gradient;

  auto design = [&](const arma::cx_mat& g_dl, SurfaceSolver solver,
                    std::uint64_t stream) {
    Rng opt_rng(derive_seed(seed, 3, stream));
    const JointResult jr = joint_beamforming(g_dl, ctx.s, n_user, n_base,
                                             p_b, budget, solver, opt_rng,
                                             opt);
    return spectral_efficiency(downlink_snr_exact(
        jr.f, jr.w, jr.gamma, ch.h_bi, ch.h_iu, ctx.s, sigma2, sigma2));
  };

  return {design(g_true_mc, SurfaceSolver::sca, 0),
          design(g_est_mc, SurfaceSolver::sca, 1),
          design(g_true_cv, SurfaceSolver::closed_form, 2),
          design(g_est_cv, SurfaceSolver::closed_form, 3),
          design(g_true_mc, SurfaceSolver::gradient_descent, 4),
          design(g_est_mc, SurfaceSolver::gradient_descent, 5)};
}

std::vector<ResultRecord> run_se_scenario(const ExperimentConfig& cfg,
                                          int workers) {
  const Columns columns = {
      {"sca-true", "se_bps_hz"},
      {"sca-estimated", "se_bps_hz"},
      {"svd-conventional-true", "se_bps_hz"},
      {"svd-conventional-estimated", "se_bps_hz"},
      {"gd-true", "se_bps_hz"},
      {"gd-estimated", "se_bps_hz"},
  };

  std::vector<SePointContext> points;
  for (double value : cfg.sweep_values) {
    SePointContext ctx;
    ctx.cfg = point_config(cfg, value, nullptr);
    ctx.wavelength = ctx.cfg.wavelength();
    ctx.surface = make_geometry(ctx.cfg.surface_nh, ctx.cfg.surface_nv,
                                ctx.cfg.surface_spacing_wl, ctx.wavelength);
    ctx.base = make_geometry(ctx.cfg.base_nh, ctx.cfg.base_nv,
                             ctx.cfg.base_spacing_wl, ctx.wavelength);
    ctx.user = make_geometry(ctx.cfg.user_nh, ctx.cfg.user_nv,
                             ctx.cfg.user_spacing_wl, ctx.wavelength);
    ctx.s = build_scattering(ctx.cfg, ctx.surface, ctx.wavelength);
    ctx.dicts =
        build_dictionaries(ctx.user, ctx.base, ctx.surface, ctx.wavelength);
    points.push_back(std::move(ctx));
  }

  const auto slots = run_grid(int(points.size()), cfg.trials, workers,
                              cfg.seed, [&](int point, int, std::uint64_t s) {
                                return se_trial(points[size_t(point)], s);
                              });
  return aggregate(cfg, columns, slots);
}

// ---------------------------------------------------------------------------
// Noise-power check.
// ---------------------------------------------------------------------------

struct NoisePointContext {
  ExperimentConfig cfg;
  UpaGeometry surface, user;
  double wavelength = 0.0;
  double distance = 0.0;
  arma::cx_mat s;
};

const double kNoiseAmps[] = {2.0, 10.0};

std::vector<double> noise_trial(const NoisePointContext& ctx,
                                std::uint64_t seed) {
  const ExperimentConfig& c = ctx.cfg;
  const double sigma2 = dbm_to_watt(c.sigma2_dbm);
  Rng rng(seed);
  const PathSet paths = draw_paths(c.paths_iu, ctx.distance,
                                   c.pathloss_exponent, ctx.wavelength, rng);
  const arma::cx_mat a_i = path_steering_rx(ctx.surface, paths,
                                            ctx.wavelength);
  const arma::cx_mat a_u = path_steering_tx(ctx.user, paths, ctx.wavelength);
  const arma::cx_mat h_iu = assemble_channel(a_i, a_u, paths.gain);

  // Unnormalized all-ones combiner, so the user-noise floor scales with the
  // combiner energy.
  const arma::cx_vec f(arma::uword(ctx.user.size()), arma::fill::ones);
  std::vector<double> out;
  out.push_back(watt_to_dbm(std::pow(arma::norm(f), 2) * sigma2));
  for (double amp : kNoiseAmps) {
    const arma::cx_vec gamma =
        amp * rng.phase_vec(arma::uword(ctx.surface.size()));
    const arma::cx_mat response = ris_response(gamma, ctx.s);
    // Surface-injected noise reaches the user through f^H H_UI R.
    const double power =
        sigma2 * std::pow(arma::norm(f.t() * h_iu.st() * response), 2);
    out.push_back(watt_to_dbm(power));
  }
  return out;
}

std::vector<ResultRecord> run_noise_scenario(const ExperimentConfig& cfg,
                                             int workers) {
  Columns columns;
  columns.emplace_back("ue-noise", "noise_power_dbm");
  for (double amp : kNoiseAmps)
    columns.emplace_back("surface-noise-a" + format_short(amp),
                         "noise_power_dbm");

  std::vector<NoisePointContext> points;
  for (double value : cfg.sweep_values) {
    NoisePointContext ctx;
    ctx.cfg = cfg;
    ctx.wavelength = cfg.wavelength();
    ctx.surface = make_geometry(cfg.surface_nh, cfg.surface_nv,
                                cfg.surface_spacing_wl, ctx.wavelength);
    ctx.user = make_geometry(cfg.user_nh, cfg.user_nv, cfg.user_spacing_wl,
                             ctx.wavelength);
    const double aperture = ctx.surface.aperture_diagonal() +
                            ctx.user.aperture_diagonal();
    const double rayleigh = 2.0 * aperture * aperture / ctx.wavelength;
    ctx.distance = value * rayleigh;
    ctx.s = build_scattering(cfg, ctx.surface, ctx.wavelength);
    points.push_back(std::move(ctx));
  }

  const auto slots = run_grid(int(points.size()), cfg.trials, workers,
                              cfg.seed, [&](int point, int, std::uint64_t s) {
                                return noise_trial(points[size_t(point)], s);
                              });
  return aggregate(cfg, columns, slots);
}

// ---------------------------------------------------------------------------
// Beam-pattern cut.
// ---------------------------------------------------------------------------

std::vector<ResultRecord> run_pattern_scenario(const ExperimentConfig& cfg,
                                               int workers) {
  const Columns columns = {{"ideal", "gain_db"}, {"coupled", "gain_db"}};
  const double wavelength = cfg.wavelength();
  const UpaGeometry surface = make_geometry(
      cfg.surface_nh, cfg.surface_nv, cfg.surface_spacing_wl, wavelength);
  const arma::cx_mat s = build_scattering(cfg, surface, wavelength);

  // Steer an incident plane wave toward a fixed target direction by phase
  // conjugation of the diagonal (coupling-unaware) response.
  const double elevation = kPi / 2.0;
  const double az_incident = kPi / 3.0;
  const double az_target = 2.0 * kPi / 3.0;
  const arma::cx_vec a_inc =
      upa_arv(surface, az_incident, elevation, wavelength);
  const arma::cx_vec a_tgt = upa_arv(surface, az_target, elevation,
                                     wavelength);
  arma::cx_vec gamma(arma::uword(surface.size()));
  for (arma::uword n = 0; n < gamma.n_elem; ++n)
    gamma[n] = std::polar(cfg.amp,
                          -(std::arg(a_inc[n]) + std::arg(a_tgt[n])));

  const arma::cx_mat zero(gamma.n_elem, gamma.n_elem, arma::fill::zeros);
  const arma::cx_mat ideal = ris_response(gamma, zero);
  const arma::cx_mat coupled = ris_response(gamma, s);

  const auto slots = run_grid(
      int(cfg.sweep_values.size()), cfg.trials, workers, cfg.seed,
      [&](int point, int, std::uint64_t) -> std::vector<double> {
        const double az_obs = cfg.sweep_values[size_t(point)];
        const double floor = 1e-30;
        const double gi = reflection_gain(surface, ideal, az_incident,
                                          elevation, az_obs, elevation,
                                          wavelength);
        const double gc = reflection_gain(surface, coupled, az_incident,
                                          elevation, az_obs, elevation,
                                          wavelength);
        return {linear_to_db(std::max(gi, floor)),
                linear_to_db(std::max(gc, floor))};
      });
  return aggregate(cfg, columns, slots);
}

}  // namespace

std::vector<ResultRecord> run_scenario(const ExperimentConfig& cfg,
                                       int workers) {
  validate_config(cfg);
  if (starts_with(cfg.scenario, "nmse-"))
    return run_estimation_grid(cfg, workers, false);
  if (starts_with(cfg.scenario, "se-")) return run_se_scenario(cfg, workers);
  if (cfg.scenario == "noise-power-check")
    return run_noise_scenario(cfg, workers);
  if (cfg.scenario == "beam-pattern")
    return run_pattern_scenario(cfg, workers);
  throw config_error("unknown scenario '" + cfg.scenario + "'");
}

std::vector<ResultRecord> time_phases(const ExperimentConfig& cfg,
                                      int workers) {
  validate_config(cfg);
  if (!starts_with(cfg.scenario, "nmse-"))
    throw config_error(
        "phase timing applies to estimation (nmse-*) scenarios only");
  return run_estimation_grid(cfg, workers, true);
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

std::string records_to_csv(const std::vector<ResultRecord>& records) {
  std::string out =
      "sweep_variable,sweep_value,method,metric,mean,std,trials,failures\n";
  for (const ResultRecord& r : records) {
    out += r.sweep_variable;
    out += ',';
    out += format_double(r.sweep_value);
    out += ',';
    out += r.method;
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.mean);
    out += ',';
    out += format_double(r.std_dev);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.failures);
    out += '\n';
  }
  return out;
}

std::string records_to_json(const std::vector<ResultRecord>& records) {
  json arr = json::array();
  for (const ResultRecord& r : records) {
    json obj;
    obj["sweep_variable"] = r.sweep_variable;
    obj["sweep_value"] = r.sweep_value;
    obj["method"] = r.method;
    obj["metric"] = r.metric;
    obj["mean"] = r.mean;
    obj["std"] = r.std_dev;
    obj["trials"] = r.trials;
    obj["failures"] = r.failures;
    arr.push_back(std::move(obj));
  }
  json root;
  root["records"] = std::move(arr);
  return root.dump(2) + "\n";
}

std::vector<ResultRecord> records_from_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("results are not valid JSON: ") +
                       e.what());
  }
  if (!root.is_object() || !root.contains("records") ||
      !root.at("records").is_array())
    throw config_error("results JSON must contain a 'records' array");
  std::vector<ResultRecord> records;
  for (const json& obj : root.at("records")) {
    ResultRecord r;
    r.sweep_variable = obj.at("sweep_variable").get<std::string>();
    r.sweep_value = obj.at("sweep_value").get<double>();
    r.method = obj.at("method").get<std::string>();
    r.metric = obj.at("metric").get<std::string>();
    r.mean = obj.at("mean").get<double>();
    r.std_dev = obj.at("std").get<double>();
    r.trials = obj.at("trials").get<int>();
    r.failures = obj.at("failures").get<int>();
    records.push_back(std::move(r));
  }
  return records;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for write");
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace arisim
