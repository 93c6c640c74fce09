#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epistrat/common.hpp"
#include "epistrat/dates.hpp"
#include "epistrat/infer.hpp"
#include "epistrat/model.hpp"
#include "epistrat/scenario.hpp"
#include "epistrat/state.hpp"
#include "epistrat/strata.hpp"

namespace epistrat {

namespace detail {

/// Wraps a JSON object for schema-checked reads: every key must be consumed
/// exactly once, and `done()` rejects anything left over.  Keeps config
/// typos from being silently ignored.
class JsonObject {
 public:
  JsonObject(const nlohmann::json& j, std::string path) : json_(j), path_(std::move(path)) {
    require(json_.is_object(), "invalid-configuration", path_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return json_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T get_required(const std::string& key) {
    require(has(key), "invalid-configuration", path_ + " is missing required key '" + key + "'");
    return convert<T>(key);
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return json_.at(key);
  }

  std::string child_path(const std::string& key) const { return path_ + "." + key; }

  void done() const {
    for (const auto& item : json_.items())
      require(seen_.count(item.key()) > 0, "invalid-configuration",
              "unknown key '" + item.key() + "' in " + path_);
  }

 private:
  template <typename T>
  T convert(const std::string& key) {
    seen_.insert(key);
    try {
      return json_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail("invalid-configuration",
           path_ + "." + key + " has the wrong type (" + std::string(e.what()) + ")");
    }
  }

  const nlohmann::json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline std::vector<std::string> default_age_labels(int num_age) {
  require(num_age >= 1, "invalid-configuration", "need at least one age group");
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(num_age));
  for (int k = 0; k + 1 < num_age; ++k)
    labels.push_back(std::to_string(10 * k) + "-" + std::to_string(10 * k + 9));
  labels.push_back(std::to_string(10 * (num_age - 1)) + "+");
  return labels;
}

struct LayoutConfig {
  int num_deprivation = 10;
  int num_age = 8;
  std::vector<std::string> age_labels = default_age_labels(8);

  StrataLayout layout() const { return StrataLayout(num_deprivation, num_age); }

  void validate() const {
    layout();  // range checks
    require(age_labels.size() == static_cast<std::size_t>(num_age), "invalid-configuration",
            "age_labels must provide one label per age group");
    std::set<std::string> unique(age_labels.begin(), age_labels.end());
    require(unique.size() == age_labels.size(), "invalid-configuration",
            "age_labels must be distinct");
  }
};

struct PathsConfig {
  std::string cases;
  std::string population;
  std::string contact;
  std::string posterior;  ///< posterior JSON-lines, input to forecast/rt/crps
};

/// How the fixed initial compartment state is obtained.
struct InitialStateConfig {
  std::string mode = "from-cases";  ///< from-cases | explicit | seed-fraction
  std::vector<Count> susceptible;   ///< explicit mode, age-major flat order
  std::vector<Count> exposed;
  std::vector<Count> infectious;
  std::vector<Count> removed;
  double ascertainment = 2.0;  ///< from-cases: latent pool per early observed case
  int window_days = 7;         ///< from-cases: averaging window at the window start
  double seed_fraction = 1e-3;  ///< seed-fraction: infectious fraction of each stratum

  void validate() const {
    require(mode == "from-cases" || mode == "explicit" || mode == "seed-fraction",
            "invalid-configuration",
            "initial_state.mode must be from-cases, explicit or seed-fraction");
    if (mode == "explicit")
      require(!susceptible.empty(), "invalid-configuration",
              "explicit initial state needs compartment arrays");
    require(ascertainment > 0.0, "invalid-configuration", "ascertainment must be positive");
    require(window_days >= 1, "invalid-configuration", "window_days must be at least 1");
    require(seed_fraction > 0.0 && seed_fraction < 1.0, "invalid-configuration",
            "seed_fraction must lie in (0,1)");
  }
};

/// Scenario request as written in the config file; depletion amounts depend
/// on fitted output, so resolution to a ScenarioSpec happens at run time.
struct ScenarioConfig {
  std::string preset;            ///< one of the named presets, or empty
  std::string type;              ///< depletion | mixing-ramp | behavioural-ramp
  double depletion_factor = 5.0;
  std::vector<double> u_diag;
  MixingForm form = MixingForm::Full;
  double omega = 0.0;
  double lag_days = 0.0;
  double zeta = 1.0;
  double epsilon = 0.0;

  bool engaged() const { return !preset.empty() || !type.empty(); }

  /// Builds the concrete spec; `cumulative` supplies per-stratum cumulative
  /// infections for depletion scenarios.
  ScenarioSpec resolve(const std::vector<Count>& cumulative = {}) const {
    if (!preset.empty()) {
      ScenarioSpec spec = scenario_preset(preset);
      if (auto* depletion = std::get_if<DepletionSpec>(&spec))
        depletion->cumulative_cases = cumulative;
      return spec;
    }
    if (type == "depletion") return DepletionSpec{cumulative, depletion_factor};
    if (type == "mixing-ramp") return MixingRampSpec{u_diag, form, omega, lag_days};
    if (type == "behavioural-ramp") return BehaviouralRampSpec{zeta, epsilon};
    fail("invalid-configuration", "scenario.type must be depletion, mixing-ramp or "
                                  "behavioural-ramp when no preset is given");
  }
};

struct SynthConfig {
  int num_days = 84;
  bool draw_from_prior = false;  ///< draw psi/rho/gamma1/alpha0 from the priors
  bool alpha_random_walk = true;  ///< draw daily drive increments from the prior
  std::optional<ModelParams> params;  ///< explicit generating parameters
  double population_per_stratum = 10000.0;

  void validate() const {
    require(num_days >= 1, "invalid-configuration", "synth.num_days must be at least 1");
    require(population_per_stratum >= 1.0, "invalid-configuration",
            "synth.population_per_stratum must be at least 1");
  }
};

struct ForecastConfig {
  int horizon = 56;       ///< days beyond the training window
  int max_draws = 0;      ///< 0 = use every posterior draw
  bool extend_drive = false;

  void validate() const {
    require(horizon >= 1, "invalid-configuration", "forecast.horizon must be at least 1");
    require(max_draws >= 0, "invalid-configuration", "forecast.max_draws cannot be negative");
  }
};

/// Full run configuration; the JSON config file mirrors this field for field
/// and unknown keys are rejected.
struct RunConfig {
  LayoutConfig layout;
  FixedConfig model;
  ModelVariant variant = ModelVariant::D;
  ChainConfig chain;
  PathsConfig paths;
  InitialStateConfig initial_state;
  ScenarioConfig scenario;
  SynthConfig synth;
  ForecastConfig forecast;
  std::string start_date = "2021-06-07";
  std::vector<double> deprivation_index;  ///< defaults to deciles 1..J
  int switching_window = 14;              ///< moving-average window for detect_switching
  bool rt_literal_denominator = false;
  std::uint64_t seed = 1;

  std::vector<double> effective_deprivation_index() const {
    if (!deprivation_index.empty()) return deprivation_index;
    std::vector<double> d;
    for (int j = 1; j <= layout.num_deprivation; ++j) d.push_back(static_cast<double>(j));
    return d;
  }

  void validate() const {
    layout.validate();
    model.validate();
    chain.validate();
    initial_state.validate();
    synth.validate();
    forecast.validate();
    parse_date(start_date);
    if (!deprivation_index.empty())
      require(deprivation_index.size() == static_cast<std::size_t>(layout.num_deprivation),
              "invalid-configuration",
              "deprivation_index must provide one value per deprivation group");
    require(switching_window >= 1, "invalid-configuration",
            "switching_window must be at least 1");
  }
};

// --- JSON helpers for value types ----------------------------------------

inline nlohmann::json params_to_json(const ModelParams& params) {
  return nlohmann::json{{"psi", params.psi},
                        {"rho", params.rho},
                        {"gamma1", params.gamma1},
                        {"alpha0", params.alpha0},
                        {"alpha_inc", params.alpha_inc}};
}

inline ModelParams params_from_json(const nlohmann::json& j, const std::string& path) {
  detail::JsonObject obj(j, path);
  ModelParams params;
  params.psi = obj.get_required<std::vector<double>>("psi");
  params.rho = obj.get_required<std::vector<double>>("rho");
  params.gamma1 = obj.get_required<double>("gamma1");
  params.alpha0 = obj.get_required<double>("alpha0");
  params.alpha_inc = obj.get<std::vector<double>>("alpha_inc", {});
  obj.done();
  return params;
}

inline nlohmann::json state_to_json(const StateMatrix& state) {
  return nlohmann::json{{"susceptible", state.susceptible},
                        {"exposed", state.exposed},
                        {"infectious", state.infectious},
                        {"removed", state.removed}};
}

inline StateMatrix state_from_json(const nlohmann::json& j, const std::string& path) {
  detail::JsonObject obj(j, path);
  StateMatrix state;
  state.susceptible = obj.get_required<std::vector<Count>>("susceptible");
  state.exposed = obj.get_required<std::vector<Count>>("exposed");
  state.infectious = obj.get_required<std::vector<Count>>("infectious");
  state.removed = obj.get_required<std::vector<Count>>("removed");
  obj.done();
  state.validate();
  return state;
}

// --- RunConfig parsing ----------------------------------------------------

namespace detail {

inline void parse_layout(JsonObject& parent, const std::string& key, LayoutConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.num_deprivation = obj.get<int>("num_deprivation", out.num_deprivation);
  out.num_age = obj.get<int>("num_age", out.num_age);
  if (obj.has("age_labels"))
    out.age_labels = obj.get_required<std::vector<std::string>>("age_labels");
  else
    out.age_labels = default_age_labels(out.num_age);
  obj.done();
}

inline void parse_model(JsonObject& parent, const std::string& key, FixedConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.eta = obj.get<double>("eta", out.eta);
  out.phi = obj.get<double>("phi", out.phi);
  out.xi = obj.get<double>("xi", out.xi);
  out.nu = obj.get<double>("nu", out.nu);
  out.gamma0 = obj.get<double>("gamma0", out.gamma0);
  out.delta_t = obj.get<double>("delta_t", out.delta_t);
  out.sigma_gamma1 = obj.get<double>("sigma_gamma1", out.sigma_gamma1);
  out.sigma_alpha0 = obj.get<double>("sigma_alpha0", out.sigma_alpha0);
  out.sigma_alpha = obj.get<double>("sigma_alpha", out.sigma_alpha);
  obj.done();
}

inline void parse_chain(JsonObject& parent, const std::string& key, ChainConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.iterations = obj.get<int>("iterations", out.iterations);
  out.burn_in = obj.get<int>("burn_in", out.burn_in);
  out.thinning = obj.get<int>("thinning", out.thinning);
  out.prior_only = obj.get<bool>("prior_only", out.prior_only);
  out.theta_target_accept = obj.get<double>("theta_target_accept", out.theta_target_accept);
  out.latent_target_accept = obj.get<double>("latent_target_accept", out.latent_target_accept);
  out.latent_moves_per_iter = obj.get<int>("latent_moves_per_iter", out.latent_moves_per_iter);
  out.alpha_site_fraction = obj.get<double>("alpha_site_fraction", out.alpha_site_fraction);
  out.shift_max_days = obj.get<int>("shift_max_days", out.shift_max_days);
  obj.done();
}

inline void parse_paths(JsonObject& parent, const std::string& key, PathsConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.cases = obj.get<std::string>("cases", out.cases);
  out.population = obj.get<std::string>("population", out.population);
  out.contact = obj.get<std::string>("contact", out.contact);
  out.posterior = obj.get<std::string>("posterior", out.posterior);
  obj.done();
}

inline void parse_initial_state(JsonObject& parent, const std::string& key,
                                InitialStateConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.mode = obj.get<std::string>("mode", out.mode);
  out.susceptible = obj.get<std::vector<Count>>("susceptible", {});
  out.exposed = obj.get<std::vector<Count>>("exposed", {});
  out.infectious = obj.get<std::vector<Count>>("infectious", {});
  out.removed = obj.get<std::vector<Count>>("removed", {});
  out.ascertainment = obj.get<double>("ascertainment", out.ascertainment);
  out.window_days = obj.get<int>("window_days", out.window_days);
  out.seed_fraction = obj.get<double>("seed_fraction", out.seed_fraction);
  obj.done();
}

inline void parse_scenario(JsonObject& parent, const std::string& key, ScenarioConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.preset = obj.get<std::string>("preset", out.preset);
  out.type = obj.get<std::string>("type", out.type);
  out.depletion_factor = obj.get<double>("factor", out.depletion_factor);
  out.u_diag = obj.get<std::vector<double>>("u_diag", out.u_diag);
  if (obj.has("form")) out.form = parse_mixing_form(obj.get_required<std::string>("form"));
  out.omega = obj.get<double>("omega", out.omega);
  out.lag_days = obj.get<double>("lag_days", out.lag_days);
  out.zeta = obj.get<double>("zeta", out.zeta);
  out.epsilon = obj.get<double>("epsilon", out.epsilon);
  obj.done();
  require(out.preset.empty() || out.type.empty(), "invalid-configuration",
          "scenario cannot give both a preset and an explicit type");
}

inline void parse_synth(JsonObject& parent, const std::string& key, SynthConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.num_days = obj.get<int>("num_days", out.num_days);
  out.draw_from_prior = obj.get<bool>("draw_from_prior", out.draw_from_prior);
  out.alpha_random_walk = obj.get<bool>("alpha_random_walk", out.alpha_random_walk);
  if (obj.has("params"))
    out.params = params_from_json(obj.raw("params"), parent.child_path(key) + ".params");
  out.population_per_stratum =
      obj.get<double>("population_per_stratum", out.population_per_stratum);
  obj.done();
}

inline void parse_forecast(JsonObject& parent, const std::string& key, ForecastConfig& out) {
  if (!parent.has(key)) return;
  JsonObject obj(parent.raw(key), parent.child_path(key));
  out.horizon = obj.get<int>("horizon", out.horizon);
  out.max_draws = obj.get<int>("max_draws", out.max_draws);
  out.extend_drive = obj.get<bool>("extend_drive", out.extend_drive);
  obj.done();
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  detail::JsonObject obj(j, "config");
  RunConfig cfg;
  detail::parse_layout(obj, "layout", cfg.layout);
  detail::parse_model(obj, "model", cfg.model);
  if (obj.has("variant")) cfg.variant = parse_variant(obj.get_required<std::string>("variant"));
  detail::parse_chain(obj, "chain", cfg.chain);
  detail::parse_paths(obj, "paths", cfg.paths);
  detail::parse_initial_state(obj, "initial_state", cfg.initial_state);
  detail::parse_scenario(obj, "scenario", cfg.scenario);
  detail::parse_synth(obj, "synth", cfg.synth);
  detail::parse_forecast(obj, "forecast", cfg.forecast);
  cfg.start_date = obj.get<std::string>("start_date", cfg.start_date);
  cfg.deprivation_index = obj.get<std::vector<double>>("deprivation_index", {});
  cfg.switching_window = obj.get<int>("switching_window", cfg.switching_window);
  cfg.rt_literal_denominator = obj.get<bool>("rt_literal_denominator", false);
  cfg.seed = obj.get<std::uint64_t>("seed", cfg.seed);
  obj.done();
  cfg.chain.seed = cfg.seed;
  cfg.chain.variant = cfg.variant;
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("invalid-configuration", "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace epistrat
