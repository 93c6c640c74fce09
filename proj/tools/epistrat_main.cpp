// Command-line front end: fit | simulate | forecast | rt | crps | scenario |
// synth.  Each command reads a JSON run configuration, writes its artifacts
// into --out, and reports failures as a single machine-parseable line
// "error:<category>: <message>" with a nonzero exit code.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epistrat/epistrat.hpp"

namespace {

using namespace epistrat;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", args.out_dir, "output directory (created if absent)");
  cmd->add_option("--seed", args.seed_override, "override the configured seed");
}

RunConfig load_run_config(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed_override) {
    cfg.seed = *args.seed_override;
    cfg.chain.seed = *args.seed_override;
  }
  std::filesystem::create_directories(args.out_dir);
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (std::filesystem::path(args.out_dir) / name).string();
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  require(out.good(), "io", "failed writing '" + path + "'");
}

/// Inputs shared by the data-driven commands.
struct LoadedData {
  CaseDataset cases;
  std::vector<double> population;
  Matrix age_mixing;
};

LoadedData load_data(const RunConfig& cfg, bool need_cases) {
  LoadedData data;
  if (need_cases || !cfg.paths.cases.empty()) {
    require(!cfg.paths.cases.empty(), "invalid-configuration",
            "this command needs paths.cases in the configuration");
    data.cases = load_cases(cfg.paths.cases, cfg.layout);
    if (data.cases.missing_cells > 0)
      std::cerr << "note: " << data.cases.missing_cells
                << " missing (stratum, day) cells were filled with zero\n";
  }
  require(!cfg.paths.population.empty(), "invalid-configuration",
          "this command needs paths.population in the configuration");
  data.population = load_population(cfg.paths.population, cfg.layout);
  if (!cfg.paths.contact.empty()) {
    data.age_mixing = load_contact_matrix(cfg.paths.contact, cfg.layout);
  } else {
    const auto K = static_cast<std::size_t>(cfg.layout.num_age);
    data.age_mixing = Matrix(K, K, 1.0);  // homogeneous age mixing
  }
  return data;
}

Covariates make_covariates(const RunConfig& cfg, const LoadedData& data, Date start,
                           int num_days) {
  Covariates cov;
  cov.deprivation_index = cfg.effective_deprivation_index();
  cov.population = data.population;
  cov.age_mixing = data.age_mixing;
  const auto J = static_cast<std::size_t>(cfg.layout.num_deprivation);
  cov.deprivation_mixing = Matrix(J, J, 1.0);
  cov.day_effect = weekday_covariate(date_range(start, num_days));
  cov.validate(cfg.layout.layout());
  return cov;
}

std::vector<ForecastDraw> to_draws(const std::vector<PosteriorSample>& samples, int max_draws) {
  std::vector<ForecastDraw> draws;
  if (max_draws <= 0 || static_cast<std::size_t>(max_draws) >= samples.size()) {
    for (const PosteriorSample& s : samples) draws.push_back({s.params, s.terminal_state});
    return draws;
  }
  const double stride = static_cast<double>(samples.size()) / max_draws;
  for (int i = 0; i < max_draws; ++i) {
    const auto idx = static_cast<std::size_t>(i * stride);
    draws.push_back({samples[idx].params, samples[idx].terminal_state});
  }
  return draws;
}

std::vector<Count> cumulative_cases(const CountGrid& counts) {
  std::vector<Count> total(counts.rows, 0);
  for (std::size_t l = 0; l < counts.rows; ++l)
    for (std::size_t t = 0; t < counts.cols; ++t) total[l] += counts(l, t);
  return total;
}

std::optional<ScenarioSpec> resolve_scenario(const RunConfig& cfg,
                                             const std::vector<Count>& cumulative) {
  if (!cfg.scenario.engaged()) return std::nullopt;
  ScenarioSpec spec = cfg.scenario.resolve(cumulative);
  if (const auto* depletion = std::get_if<DepletionSpec>(&spec))
    require(!depletion->cumulative_cases.empty(), "invalid-scenario",
            "depletion scenario needs case data to size the cumulative depletion");
  return spec;
}

// --- commands -------------------------------------------------------------

void cmd_synth(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  SyntheticResult result = generate_synthetic(cfg);
  if (result.degenerate_seed)
    std::cerr << "note: initial state has no infectious seed; the dataset is all zeros\n";
  write_cases(out_path(args, "cases.csv"), result.cases);
  LayoutConfig layout = cfg.layout;
  write_population(out_path(args, "population.csv"), layout, result.cov.population);
  write_contact_matrix(out_path(args, "contact.csv"), layout, result.cov.age_mixing);
  write_json(out_path(args, "truth.json"),
             {{"seed", cfg.seed},
              {"start_date", cfg.start_date},
              {"variant", variant_name(cfg.variant)},
              {"num_days", cfg.synth.num_days},
              {"layout",
               {{"num_deprivation", cfg.layout.num_deprivation},
                {"num_age", cfg.layout.num_age}}},
              {"degenerate_seed", result.degenerate_seed},
              {"params", params_to_json(result.params)},
              {"initial_state", state_to_json(result.initial)}});
  std::cout << "synth: wrote " << result.cases.counts.rows << " strata x "
            << result.cases.counts.cols << " days\n";
}

void cmd_fit(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  const LoadedData data = load_data(cfg, /*need_cases=*/true);
  const Covariates cov = make_covariates(cfg, data, data.cases.start, data.cases.num_days());

  FitData fit;
  fit.cases = data.cases.counts;
  fit.initial =
      build_initial_state(cfg.initial_state, data.population, cfg.model, &data.cases.counts);
  fit.cov = cov;

  ChainConfig chain = cfg.chain;
  chain.seed = cfg.seed;
  chain.variant = cfg.variant;
  const ChainResult result = run_chain(fit, cfg.model, chain);

  write_posterior_jsonl(out_path(args, "posterior.jsonl"), result.samples);
  write_posterior_csv(out_path(args, "posterior.csv"), result.samples);
  nlohmann::json acceptance;
  for (const auto& [name, st] : result.acceptance)
    acceptance[name] = {{"proposed", st.proposed}, {"accepted", st.accepted},
                        {"rate", st.rate()}};
  write_json(out_path(args, "diagnostics.json"),
             {{"samples", result.samples.size()},
              {"acceptance", acceptance},
              {"final_scales", result.final_scales},
              {"data",
               {{"strata", fit.cases.rows},
                {"days", fit.cases.cols},
                {"missing_cells", data.cases.missing_cells}}}});
  std::cout << "fit: " << result.samples.size() << " posterior samples\n";
}

void cmd_simulate(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  SyntheticResult base = generate_synthetic(cfg);  // parameters, covariates, initial state
  std::vector<Count> cumulative;
  if (!cfg.paths.cases.empty())
    cumulative = cumulative_cases(load_cases(cfg.paths.cases, cfg.layout).counts);
  const std::optional<ScenarioSpec> scenario = resolve_scenario(cfg, cumulative);

  const SimulationResult sim =
      simulate(base.initial, base.params, base.cov, cfg.model, cfg.synth.num_days, cfg.variant,
               scenario, cfg.seed, 0);
  if (sim.depletion_clipped)
    std::cerr << "note: depletion exceeded the susceptible pool in some strata (truncated)\n";

  CaseDataset out_cases = base.cases;
  out_cases.counts = sim.trajectory.events.ir;
  write_cases(out_path(args, "simulated_cases.csv"), out_cases);

  std::ofstream states(out_path(args, "states.csv"));
  require(states.good(), "io", "cannot write states.csv");
  states << "date,stratum,susceptible,exposed,infectious,removed\n";
  for (std::size_t t = 0; t < sim.trajectory.states.size(); ++t) {
    const StateMatrix& s = sim.trajectory.states[t];
    const std::string date =
        format_date(add_days(parse_date(cfg.start_date), static_cast<int>(t)));
    for (std::size_t l = 0; l < s.num_strata(); ++l)
      states << date << ',' << l << ',' << s.susceptible[l] << ',' << s.exposed[l] << ','
             << s.infectious[l] << ',' << s.removed[l] << '\n';
  }
  require(states.good(), "io", "failed writing states.csv");
  std::cout << "simulate: " << cfg.synth.num_days << " days\n";
}

void cmd_forecast(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  require(!cfg.paths.posterior.empty(), "invalid-configuration",
          "forecast needs paths.posterior (a fit output)");
  const LoadedData data = load_data(cfg, /*need_cases=*/true);
  const std::vector<PosteriorSample> samples = load_posterior_jsonl(cfg.paths.posterior);
  const std::vector<ForecastDraw> draws = to_draws(samples, cfg.forecast.max_draws);

  const Date first_day = add_days(data.cases.start, data.cases.num_days());
  const Covariates cov = make_covariates(cfg, data, first_day, cfg.forecast.horizon);
  const std::optional<ScenarioSpec> scenario =
      resolve_scenario(cfg, cumulative_cases(data.cases.counts));

  const std::vector<CountGrid> ensemble =
      forecast_ensemble(draws, cov, cfg.model, cfg.forecast.horizon, cfg.variant, scenario,
                        cfg.seed, cfg.forecast.extend_drive);
  write_forecast_csv(out_path(args, "forecast.csv"), ensemble, first_day);
  std::cout << "forecast: " << ensemble.size() << " draws x " << cfg.forecast.horizon
            << " days\n";
}

void cmd_rt(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  require(!cfg.paths.posterior.empty(), "invalid-configuration",
          "rt needs paths.posterior (a fit output)");
  const LoadedData data = load_data(cfg, /*need_cases=*/false);
  const std::vector<PosteriorSample> samples = load_posterior_jsonl(cfg.paths.posterior);
  std::vector<ForecastDraw> draws = to_draws(samples, 0);
  const Covariates cov = make_covariates(cfg, data, parse_date(cfg.start_date), 1);
  const RtEstimate rt =
      rt_estimate(draws, cov, cfg.model, cfg.variant, cfg.rt_literal_denominator);
  write_rt_csv(out_path(args, "rt.csv"), rt, cfg.layout.layout(), cfg.layout.age_labels);
  std::cout << "rt: " << draws.size() << " draws\n";
}

void cmd_crps(const CommonArgs& args) {
  const RunConfig cfg = load_run_config(args);
  require(!cfg.paths.posterior.empty(), "invalid-configuration",
          "crps needs paths.posterior (a fit output)");
  const LoadedData data = load_data(cfg, /*need_cases=*/true);
  const std::vector<PosteriorSample> samples = load_posterior_jsonl(cfg.paths.posterior);
  const std::vector<ForecastDraw> draws = to_draws(samples, cfg.forecast.max_draws);

  const int T = data.cases.num_days();
  const Covariates cov = make_covariates(cfg, data, data.cases.start, T);
  const StateMatrix initial =
      build_initial_state(cfg.initial_state, data.population, cfg.model, &data.cases.counts);

  // Posterior-predictive replay of the training window from each draw.
  std::vector<CountGrid> ensemble;
  ensemble.reserve(draws.size());
  for (std::size_t m = 0; m < draws.size(); ++m) {
    const SimulationResult sim = simulate(initial, draws[m].params, cov, cfg.model, T,
                                          cfg.variant, std::nullopt, cfg.seed, m);
    ensemble.push_back(sim.trajectory.events.ir);
  }
  const CrpsTable table = crps_table(ensemble, data.cases.counts);
  write_crps_csv(out_path(args, "crps.csv"), table, cfg.layout.layout(), cfg.layout.age_labels,
                 data.cases.start);
  write_json(out_path(args, "crps_summary.json"),
             {{"q1", table.q1}, {"q2", table.q2}, {"q3", table.q3}});
  std::cout << "crps: q1=" << table.q1 << " q2=" << table.q2 << " q3=" << table.q3 << '\n';
}

void cmd_scenario(const CommonArgs& args, const std::string& preset_override) {
  RunConfig cfg = load_run_config(args);
  if (!preset_override.empty() && preset_override != "none") {
    cfg.scenario = ScenarioConfig{};
    cfg.scenario.preset = preset_override;
  } else if (preset_override == "none") {
    cfg.scenario = ScenarioConfig{};
  }
  require(!cfg.paths.posterior.empty(), "invalid-configuration",
          "scenario needs paths.posterior (a fit output)");
  const LoadedData data = load_data(cfg, /*need_cases=*/true);
  const std::vector<PosteriorSample> samples = load_posterior_jsonl(cfg.paths.posterior);
  const std::vector<ForecastDraw> draws = to_draws(samples, cfg.forecast.max_draws);

  const Date first_day = add_days(data.cases.start, data.cases.num_days());
  const Covariates cov = make_covariates(cfg, data, first_day, cfg.forecast.horizon);
  const std::optional<ScenarioSpec> scenario =
      resolve_scenario(cfg, cumulative_cases(data.cases.counts));

  if (scenario) {
    if (const auto* ramp = std::get_if<MixingRampSpec>(&*scenario)) {
      const Matrix cd = mixing_at(*ramp, 45.0);
      std::cout << "scenario: C_D(t=45) decile-1 factor " << cd(0, 0) << ", decile-"
                << cd.rows << " factor " << cd(cd.rows - 1, cd.cols - 1) << '\n';
    }
  } else {
    std::cout << "scenario: no perturbation (baseline forecast)\n";
  }

  const std::vector<CountGrid> ensemble =
      forecast_ensemble(draws, cov, cfg.model, cfg.forecast.horizon, cfg.variant, scenario,
                        cfg.seed, cfg.forecast.extend_drive);
  write_forecast_csv(out_path(args, "forecast.csv"), ensemble, first_day);

  // Ensemble-mean incidence per 100k aggregated over deprivation groups.
  const StrataLayout layout = cfg.layout.layout();
  Matrix imd_series(static_cast<std::size_t>(layout.num_deprivation),
                    static_cast<std::size_t>(cfg.forecast.horizon), 0.0);
  for (const CountGrid& member : ensemble) {
    const Matrix agg = aggregate(member, layout, AggregateAxis::Imd, true, data.population);
    for (std::size_t i = 0; i < imd_series.values.size(); ++i)
      imd_series.values[i] += agg.values[i];
  }
  for (double& v : imd_series.values) v /= static_cast<double>(ensemble.size());

  const SwitchingTrace trace = detect_switching(imd_series, cfg.switching_window);
  write_switching_csv(out_path(args, "switching.csv"), trace);
  nlohmann::json summary{{"reversal_day", nullptr},
                         {"baseline_order", trace.baseline_order},
                         {"window", cfg.switching_window}};
  if (trace.reversal_day) {
    summary["reversal_day"] = *trace.reversal_day;
    std::cout << "scenario: full reversal on day " << *trace.reversal_day << '\n';
  } else {
    std::cout << "scenario: no full reversal within the horizon\n";
  }
  write_json(out_path(args, "switching_summary.json"), summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stratified stochastic SEIR engine: simulate, fit, score, perturb"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string scenario_preset;

  CLI::App* fit = app.add_subcommand("fit", "run the augmented-data MCMC on case data");
  CLI::App* simulate = app.add_subcommand("simulate", "forward-simulate one trajectory");
  CLI::App* forecast = app.add_subcommand("forecast", "posterior-predictive forecast");
  CLI::App* rt = app.add_subcommand("rt", "per-stratum reproduction numbers");
  CLI::App* crps = app.add_subcommand("crps", "score the fit on the training window");
  CLI::App* scenario = app.add_subcommand("scenario", "what-if forecast + switching trace");
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  for (CLI::App* cmd : {fit, simulate, forecast, rt, crps, scenario, synth})
    add_common(cmd, args);
  scenario->add_option("--preset", scenario_preset,
                       "scenario preset name, or 'none' for a baseline run");

  try {
    app.parse(argc, argv);
    if (fit->parsed()) cmd_fit(args);
    if (simulate->parsed()) cmd_simulate(args);
    if (forecast->parsed()) cmd_forecast(args);
    if (rt->parsed()) cmd_rt(args);
    if (crps->parsed()) cmd_crps(args);
    if (scenario->parsed()) cmd_scenario(args, scenario_preset);
    if (synth->parsed()) cmd_synth(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const epistrat::Error& e) {
    std::cerr << "error:" << e.category() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
