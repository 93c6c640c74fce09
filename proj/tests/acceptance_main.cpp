// Acceptance gate: exercises the library end to end and prints exactly one
// PASS/FAIL line per criterion, with every tolerance pinned in this file.
// Exit status is nonzero if any criterion fails.  The heavier criteria
// (sampler calibration, model-selection ordering, deprivation switching)
// rerun the full inference pipeline on synthetic data, so the binary takes
// a few minutes; progress is printed as criteria complete.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "epistrat/epistrat.hpp"
#include "helpers.hpp"

using namespace epistrat;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double value) {
  std::ostringstream out;
  out.precision(4);
  out << value;
  return out.str();
}

CountGrid slice_cols(const CountGrid& grid, std::size_t begin, std::size_t len) {
  CountGrid out(grid.rows, len, 0);
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < len; ++c) out(r, c) = grid(r, begin + c);
  return out;
}

std::vector<ForecastDraw> to_draws(const std::vector<PosteriorSample>& samples) {
  std::vector<ForecastDraw> draws;
  draws.reserve(samples.size());
  for (const PosteriorSample& s : samples) draws.push_back({s.params, s.terminal_state});
  return draws;
}

// --- criterion 1: behavioural adaptation ----------------------------------

Outcome criterion_behavioural_adaptation() {
  const FixedConfig cfg;  // eta = phi = 2, xi = 0.3

  // Hand-derived K = 2, J = 3 table for psi = (0.6, 0.4), rho = (0.5, 0.9).
  const std::vector<double> chi =
      behavioural_adaptation({0.6, 0.4}, {0.5, 0.9}, {1.0, 2.0, 3.0}, cfg, ModelVariant::D);
  const std::vector<double> expected{3.2, 3.2, 3.2,
                                     3.0330500899612727, 2.8, 2.5669499100387273};
  double table_dev = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i)
    table_dev = std::max(table_dev, std::abs(chi[i] - expected[i]));

  // Area invariance at K = 8, J = 10 over 100 random admissible draws.
  std::vector<double> deciles;
  for (int j = 1; j <= 10; ++j) deciles.push_back(static_cast<double>(j));
  RngStream rng = RngStream::from(20260823, {1});
  double area_dev = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> psi(8), rho(8);
    for (double& p : psi) p = 0.02 + 0.96 * uniform01(rng);
    for (double& p : rho) p = 0.02 + 0.96 * uniform01(rng);
    const std::vector<double> draw =
        behavioural_adaptation(psi, rho, deciles, cfg, ModelVariant::D);
    double sum = 0.0;
    for (double v : draw) sum += v;
    const double expected_sum = static_cast<double>(draw.size()) * (cfg.phi + cfg.eta / 2.0);
    area_dev = std::max(area_dev, std::abs(sum - expected_sum) / expected_sum);
  }

  Outcome out;
  out.ok = table_dev <= 1e-12 && area_dev <= 1e-9;
  out.detail = "table dev " + fmt(table_dev) + " (tol 1e-12), area dev " + fmt(area_dev) +
               " rel (tol 1e-9)";
  return out;
}

// --- criterion 2: mixing-ramp anchor --------------------------------------

Outcome criterion_mixing_anchor() {
  const auto spec = std::get<MixingRampSpec>(scenario_preset("paper-mixing-full"));
  const Matrix cd = mixing_at(spec, 45.0);
  const double dev1 = std::abs(cd(0, 0) - 1.1785);
  const double dev10 = std::abs(cd(9, 9) - 5.19475);
  Outcome out;
  out.ok = dev1 <= 1e-12 && dev10 <= 1e-12;
  out.detail = "C_D(45) diag 1 = " + fmt(cd(0, 0)) + ", diag 10 = " + fmt(cd(9, 9)) +
               " (tol 1e-12)";
  return out;
}

// --- criterion 3: simulator versus exhaustive enumeration -----------------

Outcome criterion_simulator_enumeration() {
  // Single stratum of three people (x_S = 2, x_I = 1), two days.
  const FixedConfig cfg;
  StateMatrix initial(1);
  initial.susceptible[0] = 2;
  initial.infectious[0] = 1;

  ModelParams params;
  params.psi = {0.5};
  params.rho = {0.5};
  params.gamma1 = 0.3;
  params.alpha0 = 0.0;
  params.alpha_inc = {0.0, 0.0};

  Covariates cov;
  cov.deprivation_index = {1.0};
  cov.population = {3.0};
  cov.age_mixing = Matrix(1, 1, 1.0);
  cov.deprivation_mixing = Matrix(1, 1, 1.0);
  cov.day_effect = {2.0 / 7.0, -5.0 / 7.0};

  const auto exact = testutil::enumerate_terminal({2, 0, 1, 0}, 3.0, 1.0, 1.0, {0.0, 0.0},
                                                  params.gamma1, cov.day_effect, cfg);
  double mass = 0.0;
  for (const auto& [state, prob] : exact) mass += prob;
  if (std::abs(mass - 1.0) > 1e-9) return {false, "enumeration mass " + fmt(mass)};

  const int num_runs = 100000;
  std::map<std::array<Count, 4>, double> empirical;
  for (int rep = 0; rep < num_runs; ++rep) {
    const SimulationResult res = simulate(initial, params, cov, cfg, 2, ModelVariant::A,
                                          std::nullopt, 99, static_cast<std::uint64_t>(rep));
    const StateMatrix& fin = res.trajectory.states.back();
    empirical[{fin.susceptible[0], fin.exposed[0], fin.infectious[0], fin.removed[0]}] +=
        1.0 / num_runs;
  }

  double tv = 0.0;
  for (const auto& [state, prob] : exact) {
    const auto it = empirical.find(state);
    tv += std::abs((it == empirical.end() ? 0.0 : it->second) - prob);
  }
  for (const auto& [state, prob] : empirical)
    if (exact.find(state) == exact.end()) tv += prob;
  tv *= 0.5;

  Outcome out;
  out.ok = tv <= 0.02;
  out.detail = "TV distance " + fmt(tv) + " over " + std::to_string(num_runs) +
               " runs (tol 0.02)";
  return out;
}

// --- criterion 4: exact conservation at scale -----------------------------

Outcome criterion_conservation() {
  const FixedConfig cfg;
  const StrataLayout layout(10, 8);  // L = 80
  const auto L = static_cast<std::size_t>(layout.num_strata());
  const int T = 84;

  Covariates cov;
  for (int j = 1; j <= 10; ++j) cov.deprivation_index.push_back(static_cast<double>(j));
  cov.population.assign(L, 10000.0);
  cov.age_mixing = Matrix(8, 8, 0.0);
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b)
      cov.age_mixing(a, b) = 1.0 / (1.0 + std::abs(static_cast<double>(a) - static_cast<double>(b)));
  cov.deprivation_mixing = Matrix(10, 10, 1.0);
  cov.day_effect = weekday_covariate(date_range(parse_date("2021-06-07"), T));

  const std::vector<std::string> presets = scenario_preset_names();
  long violations = 0;
  long clipped = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    RngStream rng = RngStream::from(846, {static_cast<std::uint64_t>(rep)});
    ModelParams params;
    params.psi.resize(8);
    params.rho.resize(8);
    for (double& p : params.psi) p = 0.1 + 0.8 * uniform01(rng);
    for (double& p : params.rho) p = 0.1 + 0.8 * uniform01(rng);
    params.gamma1 = 0.4 * (uniform01(rng) - 0.5);
    params.alpha_inc.resize(T);
    for (double& inc : params.alpha_inc) inc = 0.04 * (uniform01(rng) - 0.5);
    const std::vector<double> chi = behavioural_adaptation(
        params.psi, params.rho, cov.deprivation_index, cfg, ModelVariant::D);
    const Matrix kron = kron_mixing(cov.age_mixing, cov.deprivation_mixing);
    params.alpha0 = calibrate_alpha0(chi, kron, cov.population, 0.3) + uniform01(rng) - 0.5;

    StateMatrix initial(L);
    for (std::size_t l = 0; l < L; ++l) {
      initial.exposed[l] = static_cast<Count>(20.0 * uniform01(rng));
      initial.infectious[l] = static_cast<Count>(25.0 * uniform01(rng)) + 1;
      initial.removed[l] = static_cast<Count>(10.0 * uniform01(rng));
      initial.susceptible[l] =
          10000 - initial.exposed[l] - initial.infectious[l] - initial.removed[l];
    }

    std::optional<ScenarioSpec> scenario;
    const int pick = rep % (static_cast<int>(presets.size()) + 1);
    if (pick > 0) {
      ScenarioSpec spec = scenario_preset(presets[static_cast<std::size_t>(pick - 1)]);
      if (auto* depletion = std::get_if<DepletionSpec>(&spec)) {
        depletion->cumulative_cases.resize(L);
        for (Count& c : depletion->cumulative_cases)
          c = static_cast<Count>(400.0 * uniform01(rng));
      }
      scenario = spec;
    }

    const SimulationResult res =
        simulate(initial, params, cov, cfg, T, ModelVariant::D, scenario,
                 static_cast<std::uint64_t>(rep), 0);
    if (res.depletion_clipped) ++clipped;
    for (std::size_t l = 0; l < L; ++l) {
      const Count expected = initial.total(l);
      for (const StateMatrix& state : res.trajectory.states)
        if (state.total(l) != expected) ++violations;
    }
  }

  Outcome out;
  out.ok = violations == 0;
  out.detail = "1000 trajectories (baseline + all " + std::to_string(presets.size()) +
               " presets), " + std::to_string(violations) + " total violations, " +
               std::to_string(clipped) + " depletion clips";
  return out;
}

// --- criterion 5: likelihood versus independent oracle --------------------

/// Random two-stratum (J = 2, K = 1) fit problem with a feasible latent path
/// obtained by forward simulation.
struct RandomProblem {
  FitData data;
  LatentPath latents;
  ModelParams params;
  FixedConfig cfg;

  explicit RandomProblem(std::uint64_t seed, int num_days) {
    RngStream rng = RngStream::from(seed, {77});
    params.psi = {0.2 + 0.6 * uniform01(rng)};
    params.rho = {0.2 + 0.6 * uniform01(rng)};
    params.gamma1 = 0.4 * (uniform01(rng) - 0.5);
    params.alpha_inc.resize(static_cast<std::size_t>(num_days));
    for (double& inc : params.alpha_inc) inc = 0.02 * (uniform01(rng) - 0.5);

    data.cov.deprivation_index = {1.0, 2.0};
    data.cov.population = {30.0, 40.0};
    data.cov.age_mixing = Matrix(1, 1, 1.0);
    data.cov.deprivation_mixing = Matrix(2, 2, 1.0);
    data.cov.deprivation_mixing(0, 1) = 0.5;
    data.cov.deprivation_mixing(1, 0) = 0.5;
    data.cov.day_effect = weekday_covariate(date_range(parse_date("2021-06-07"), num_days));

    data.initial = StateMatrix(2);
    data.initial.susceptible = {20, 28};
    data.initial.exposed = {5, 6};
    data.initial.infectious = {5, 6};

    const std::vector<double> chi = behavioural_adaptation(
        params.psi, params.rho, data.cov.deprivation_index, cfg, ModelVariant::D);
    const Matrix kron = kron_mixing(data.cov.age_mixing, data.cov.deprivation_mixing);
    params.alpha0 = calibrate_alpha0(chi, kron, data.cov.population, 0.5) + uniform01(rng) - 0.5;

    const SimulationResult sim = simulate(data.initial, params, data.cov, cfg, num_days,
                                          ModelVariant::D, std::nullopt, seed, 0);
    latents.se = sim.trajectory.events.se;
    latents.ei = sim.trajectory.events.ei;
    data.cases = sim.trajectory.events.ir;
  }
};

/// Day-by-day state reconstruction with naive lgamma binomial pmfs.
double oracle_log_likelihood(const FitData& data, const LatentPath& latents,
                             const ModelParams& params, const FixedConfig& cfg,
                             ModelVariant variant) {
  const std::size_t L = data.cases.rows;
  const std::size_t T = data.cases.cols;
  const std::vector<double> chi =
      behavioural_adaptation(params.psi, params.rho, data.cov.deprivation_index, cfg, variant);
  const Matrix kron = kron_mixing(effective_age_mixing(variant, data.cov.age_mixing),
                                  data.cov.deprivation_mixing);
  const std::vector<double> drive = random_walk_drive(params.alpha0, params.alpha_inc);

  StateMatrix state = data.initial;
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const HazardRates hz = hazards(state.infectious, chi, kron, data.cov.population, drive[t + 1],
                                   params.gamma1, data.cov.day_effect[t], cfg);
    for (std::size_t l = 0; l < L; ++l) {
      total += testutil::binomial_logpmf(latents.se(l, t), state.susceptible[l],
                                         transition_prob(hz.se[l], cfg.delta_t));
      total += testutil::binomial_logpmf(latents.ei(l, t), state.exposed[l],
                                         transition_prob(hz.ei[l], cfg.delta_t));
      total += testutil::binomial_logpmf(data.cases(l, t), state.infectious[l],
                                         transition_prob(hz.ir[l], cfg.delta_t));
      state.susceptible[l] -= latents.se(l, t);
      state.exposed[l] += latents.se(l, t) - latents.ei(l, t);
      state.infectious[l] += latents.ei(l, t) - data.cases(l, t);
      state.removed[l] += data.cases(l, t);
      if (state.susceptible[l] < 0 || state.exposed[l] < 0 || state.infectious[l] < 0)
        return -std::numeric_limits<double>::infinity();
    }
  }
  return total;
}

Outcome criterion_likelihood_oracle() {
  double max_dev = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RandomProblem prob(seed, 3);
    const double got =
        log_likelihood(prob.data, prob.latents, prob.params, prob.cfg, ModelVariant::D);
    const double want =
        oracle_log_likelihood(prob.data, prob.latents, prob.params, prob.cfg, ModelVariant::D);
    if (!std::isfinite(got) || !std::isfinite(want))
      return {false, "non-finite likelihood at seed " + std::to_string(seed)};
    max_dev = std::max(max_dev, std::abs(got - want));
  }
  Outcome out;
  out.ok = max_dev <= 1e-10;
  out.detail = "max |library - oracle| = " + fmt(max_dev) +
               " over 100 feasible configurations (tol 1e-10)";
  return out;
}

// --- criterion 6: sampler calibration -------------------------------------

Outcome criterion_sampler() {
  std::ostringstream detail;

  // Prior-only: 10^4 thinned draws must look uniform on (0,1) for psi, rho.
  RandomProblem prior_prob(3, 6);
  ChainConfig prior_chain;
  prior_chain.iterations = 252000;
  prior_chain.burn_in = 2000;
  prior_chain.thinning = 25;
  prior_chain.seed = 17;
  prior_chain.prior_only = true;
  const ChainResult prior_result = run_chain(prior_prob.data, prior_prob.cfg, prior_chain);
  std::vector<double> psi_draws, rho_draws;
  for (const PosteriorSample& s : prior_result.samples) {
    psi_draws.push_back(s.params.psi[0]);
    rho_draws.push_back(s.params.rho[0]);
  }
  const double p_psi = testutil::ks_uniform_pvalue(psi_draws);
  const double p_rho = testutil::ks_uniform_pvalue(rho_draws);
  const bool prior_ok =
      prior_result.samples.size() >= 10000 && p_psi > 0.01 && p_rho > 0.01;
  detail << "prior KS p(psi) " << fmt(p_psi) << " p(rho) " << fmt(p_rho) << " over "
         << prior_result.samples.size() << " draws (need > 0.01)";

  // Posterior recovery: 90% equal-tailed intervals must cover the generating
  // psi, rho, gamma1 in at least 15 of 20 independent replicates.
  const FixedConfig cfg;
  const int T = 28;
  Covariates cov;
  cov.deprivation_index = {1.0, 2.0, 3.0};
  cov.population.assign(6, 2000.0);
  cov.age_mixing = Matrix(2, 2, 1.0);
  cov.deprivation_mixing = Matrix(3, 3, 1.0);
  cov.day_effect = weekday_covariate(date_range(parse_date("2021-06-07"), T));

  ModelParams truth;
  truth.psi = {0.6, 0.4};
  truth.rho = {0.3, 0.8};
  truth.gamma1 = 0.1;
  truth.alpha_inc.assign(T, 0.0);
  const std::vector<double> chi =
      behavioural_adaptation(truth.psi, truth.rho, cov.deprivation_index, cfg, ModelVariant::D);
  truth.alpha0 = calibrate_alpha0(
      chi, kron_mixing(cov.age_mixing, cov.deprivation_mixing), cov.population, 0.4);

  StateMatrix initial(6);
  for (std::size_t l = 0; l < 6; ++l) {
    initial.susceptible[l] = 1960;
    initial.exposed[l] = 20;
    initial.infectious[l] = 20;
  }

  const std::vector<std::string> names{"psi0", "psi1", "rho0", "rho1", "gamma1"};
  const std::vector<double> target{truth.psi[0], truth.psi[1], truth.rho[0], truth.rho[1],
                                   truth.gamma1};
  std::vector<int> covered(names.size(), 0);
  for (int rep = 0; rep < 20; ++rep) {
    const SimulationResult sim =
        simulate(initial, truth, cov, cfg, T, ModelVariant::D, std::nullopt,
                 static_cast<std::uint64_t>(7000 + rep), 0);
    FitData data;
    data.cases = sim.trajectory.events.ir;
    data.initial = initial;
    data.cov = cov;

    ChainConfig chain;
    chain.iterations = 6000;
    chain.burn_in = 2500;
    chain.thinning = 7;
    chain.seed = static_cast<std::uint64_t>(9000 + rep);
    const ChainResult result = run_chain(data, cfg, chain);

    std::vector<std::vector<double>> draws(names.size());
    for (const PosteriorSample& s : result.samples) {
      draws[0].push_back(s.params.psi[0]);
      draws[1].push_back(s.params.psi[1]);
      draws[2].push_back(s.params.rho[0]);
      draws[3].push_back(s.params.rho[1]);
      draws[4].push_back(s.params.gamma1);
    }
    for (std::size_t p = 0; p < names.size(); ++p) {
      const double lo = quantile(draws[p], 0.05);
      const double hi = quantile(draws[p], 0.95);
      if (lo <= target[p] && target[p] <= hi) ++covered[p];
    }
  }

  bool recovery_ok = true;
  detail << "; coverage";
  for (std::size_t p = 0; p < names.size(); ++p) {
    recovery_ok = recovery_ok && covered[p] >= 15;
    detail << " " << names[p] << " " << covered[p] << "/20";
  }
  detail << " (need >= 15/20)";

  Outcome out;
  out.ok = prior_ok && recovery_ok;
  out.detail = detail.str();
  return out;
}

// --- criterion 7: model-selection ordering --------------------------------

Outcome criterion_model_selection() {
  const FixedConfig cfg;
  const int total_days = 84;
  const int train_days = 56;
  const int horizon = total_days - train_days;
  const Date start = parse_date("2021-06-07");

  Covariates cov;
  cov.deprivation_index = {1.0, 2.0, 3.0};
  cov.population.assign(6, 20000.0);
  cov.age_mixing = Matrix(2, 2, 1.0);
  cov.deprivation_mixing = Matrix(3, 3, 1.0);
  cov.day_effect = weekday_covariate(date_range(start, total_days));

  // Wide psi/rho spreads give the generating model a strong stratum
  // signature (relative adaptation spread around +-30%), so the adapted
  // variant has something real to recover that the homogeneous variant
  // cannot express in its forecasts.
  ModelParams truth;
  truth.psi = {0.8, 0.2};
  truth.rho = {0.02, 0.98};
  truth.gamma1 = 0.1;
  truth.alpha_inc.assign(total_days, 0.0);
  const std::vector<double> chi =
      behavioural_adaptation(truth.psi, truth.rho, cov.deprivation_index, cfg, ModelVariant::D);
  truth.alpha0 = calibrate_alpha0(
      chi, kron_mixing(cov.age_mixing, cov.deprivation_mixing), cov.population, 0.28);

  StateMatrix initial(6);
  for (std::size_t l = 0; l < 6; ++l) {
    initial.susceptible[l] = 19900;
    initial.exposed[l] = 50;
    initial.infectious[l] = 50;
  }
  const SimulationResult sim = simulate(initial, truth, cov, cfg, total_days, ModelVariant::D,
                                        std::nullopt, 31415, 0);
  const CountGrid train = slice_cols(sim.trajectory.events.ir, 0, train_days);
  const CountGrid holdout =
      slice_cols(sim.trajectory.events.ir, train_days, static_cast<std::size_t>(horizon));

  Covariates cov_train = cov;
  cov_train.day_effect.assign(cov.day_effect.begin(), cov.day_effect.begin() + train_days);
  Covariates cov_forecast = cov;
  cov_forecast.day_effect = weekday_covariate(date_range(add_days(start, train_days), horizon));

  FitData data;
  data.cases = train;
  data.initial = initial;
  data.cov = cov_train;

  // Both chains start from the generating simulation's latent path.  That
  // path has positive posterior density under either variant, so the
  // stationary distribution is unchanged; what it removes is the long
  // relaxation from the heuristic initial path, whose downward level bias
  // would otherwise dominate both forecasts at these daily counts.
  LatentPath warm;
  warm.se = slice_cols(sim.trajectory.events.se, 0, train_days);
  warm.ei = slice_cols(sim.trajectory.events.ei, 0, train_days);

  const auto median_crps = [&](ModelVariant variant, std::uint64_t chain_seed) {
    ChainConfig chain;
    chain.iterations = 10000;
    chain.burn_in = 4000;
    chain.thinning = 10;
    chain.seed = chain_seed;
    chain.variant = variant;
    chain.latent_moves_per_iter = 100;
    const ChainResult fit = run_chain(data, cfg, chain, std::nullopt, warm);
    const std::vector<CountGrid> ensemble = forecast_ensemble(
        to_draws(fit.samples), cov_forecast, cfg, horizon, variant, std::nullopt, 97);
    return crps_table(ensemble, holdout).q2;
  };

  const double crps_d = median_crps(ModelVariant::D, 271);
  const double crps_a = median_crps(ModelVariant::A, 272);

  Outcome out;
  out.ok = crps_d < crps_a;
  out.detail = "held-out median CRPS: variant D " + fmt(crps_d) + " vs variant A " +
               fmt(crps_a) + " (need D < A strictly)";
  return out;
}

// --- criterion 8: deprivation switching -----------------------------------

// Synthetic deprivation index values for the switching fixture.  The decile
// adaptation factor saturates in tanh, so raw 1..10 scores concentrate the
// decile-to-decile transmission gaps in the extreme deciles and leave the
// middle pairs separated by fractions of a percent -- unresolvable over an
// 8-week horizon.  Instead the index values are placed so the adjacent
// adaptation gaps are proportional to the log-ratio of consecutive mixing
// ramp destinations (clamped): pairs the ramp pushes apart quickly get wide
// baseline gaps, pairs it pushes slowly get narrow ones, and every adjacent
// pair then swaps order at about the same forecast day.
std::vector<double> switching_deciles(double xi) {
  const double destinations[10] = {6, 8, 11, 16, 23, 35, 41, 55, 75, 141};
  double weight[9];
  double total = 0.0;
  for (int j = 0; j < 9; ++j) {
    weight[j] = std::clamp(std::log(destinations[j + 1] / destinations[j]), 0.20, 0.42);
    total += weight[j];
  }
  std::vector<double> index(10);
  double f = 0.98;  // tanh(-xi (d - mean d)) runs from +0.98 down to -0.98
  for (int j = 0; j < 10; ++j) {
    index[j] = 10.0 - std::atanh(f) / xi;
    if (j < 9) f -= 2.0 * 0.98 * weight[j] / total;
  }
  return index;
}

Outcome criterion_switching() {
  const FixedConfig cfg;
  const StrataLayout layout(10, 1);  // ten deciles, one age group
  const int train_days = 21;
  const int horizon = 56;  // eight weeks
  const int members = 2000;
  const Date start = parse_date("2021-06-07");

  Covariates cov;
  cov.deprivation_index = switching_deciles(cfg.xi);
  cov.population.assign(10, 110000.0);
  cov.age_mixing = Matrix(1, 1, 1.0);
  cov.deprivation_mixing = Matrix(10, 10, 1.0);
  cov.day_effect = weekday_covariate(date_range(start, train_days));

  // A steep deprivation slope (rho near 1) puts decile 1 clearly on top at
  // baseline.  Prevalence sits near 2.5%: the ramp's cross-stratum forcing
  // scales with pooled prevalence, and below roughly 1% the reversal cannot
  // complete within eight weeks.  The short training window keeps the
  // cumulative attack fraction from compressing the baseline decile gaps
  // through differential susceptible depletion.
  ModelParams truth;
  truth.psi = {0.5};
  truth.rho = {0.97};
  truth.gamma1 = 0.1;
  truth.alpha_inc.assign(train_days, 0.0);
  const std::vector<double> chi =
      behavioural_adaptation(truth.psi, truth.rho, cov.deprivation_index, cfg, ModelVariant::D);
  truth.alpha0 = calibrate_alpha0(
      chi, kron_mixing(cov.age_mixing, cov.deprivation_mixing), cov.population, 0.26);

  StateMatrix initial(10);
  for (std::size_t l = 0; l < 10; ++l) {
    initial.susceptible[l] = 104500;
    initial.exposed[l] = 2750;
    initial.infectious[l] = 2750;
  }
  const SimulationResult sim = simulate(initial, truth, cov, cfg, train_days, ModelVariant::D,
                                        std::nullopt, 8888, 0);

  FitData data;
  data.cases = sim.trajectory.events.ir;
  data.initial = initial;
  data.cov = cov;

  // Warm-start the chain at the generating simulation's latent path (same
  // posterior, see the model-selection criterion).  At several hundred
  // events per stratum-day the +-1 latent moves relax the heuristic initial
  // path far too slowly for this budget, so the warm start is what makes a
  // converged fit feasible here; the extra latent moves per iteration then
  // keep the path mixing at these counts.
  LatentPath warm;
  warm.se = sim.trajectory.events.se;
  warm.ei = sim.trajectory.events.ei;

  ChainConfig chain;
  chain.iterations = 15000;
  chain.burn_in = 6000;
  chain.thinning = 9;
  chain.seed = 444;
  chain.latent_moves_per_iter = 150;
  const ChainResult fit = run_chain(data, cfg, chain, std::nullopt, warm);

  // Cycle posterior draws up to the member count; duplicated draws still get
  // independent trajectories because the forecast streams are member-keyed.
  std::vector<ForecastDraw> draws = to_draws(fit.samples);
  while (static_cast<int>(draws.size()) < members)
    draws.push_back(draws[draws.size() - fit.samples.size()]);
  if (static_cast<int>(draws.size()) > members) draws.resize(members);

  Covariates cov_forecast = cov;
  cov_forecast.day_effect = weekday_covariate(date_range(add_days(start, train_days), horizon));

  const auto reversal = [&](const std::optional<ScenarioSpec>& scenario) {
    const std::vector<CountGrid> ensemble =
        forecast_ensemble(draws, cov_forecast, cfg, horizon, ModelVariant::D, scenario, 55);
    Matrix series(10, static_cast<std::size_t>(horizon), 0.0);
    for (const CountGrid& member : ensemble) {
      const Matrix agg = aggregate(member, layout, AggregateAxis::Imd, true, cov.population);
      for (std::size_t i = 0; i < series.values.size(); ++i) series.values[i] += agg.values[i];
    }
    for (double& v : series.values) v /= static_cast<double>(ensemble.size());
    return detect_switching(series, 7).reversal_day;
  };

  const auto ramp_day = reversal(scenario_preset("paper-mixing-full"));
  const auto baseline_day = reversal(std::nullopt);

  Outcome out;
  out.ok = ramp_day.has_value() && !baseline_day.has_value();
  out.detail = "full-mixing ramp reversal day " +
               (ramp_day ? std::to_string(*ramp_day) : std::string("none")) +
               " (need one within " + std::to_string(horizon) + " days); baseline " +
               (baseline_day ? "day " + std::to_string(*baseline_day) : std::string("none")) +
               " (need none)";
  return out;
}

// --- criterion 9: CRPS closed forms ---------------------------------------

Outcome criterion_crps_closed_forms() {
  double dev = 0.0;
  dev = std::max(dev, std::abs(crps_empirical({3.0}, 4.5) - 1.5));
  dev = std::max(dev, std::abs(crps_empirical({0.0, 2.0}, 1.0) - 0.5));
  dev = std::max(dev, std::abs(crps_empirical({3.0, 7.0}, 4.0) - 1.0));
  dev = std::max(dev, std::abs(crps_empirical({1.0, 2.0, 4.0}, 3.0) - 2.0 / 3.0));
  Outcome out;
  out.ok = dev <= 1e-12;
  out.detail = "max deviation from hand values " + fmt(dev) + " (tol 1e-12)";
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*fn)();
  };
  const std::vector<Entry> criteria{
      {"behavioural-adaptation", criterion_behavioural_adaptation},
      {"mixing-ramp-anchor", criterion_mixing_anchor},
      {"simulator-enumeration", criterion_simulator_enumeration},
      {"conservation", criterion_conservation},
      {"likelihood-oracle", criterion_likelihood_oracle},
      {"sampler-calibration", criterion_sampler},
      {"model-selection-ordering", criterion_model_selection},
      {"deprivation-switching", criterion_switching},
      {"crps-closed-forms", criterion_crps_closed_forms},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto begin = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("unexpected exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    if (!outcome.ok) ++failures;
    std::printf("%s criterion-%zu %s: %s (%.1fs)\n", outcome.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("acceptance: %d of %zu criteria failed\n", failures, criteria.size());
  else std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  return failures == 0 ? 0 : 1;
}
