#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "epistrat/common.hpp"
#include "epistrat/model.hpp"
#include "epistrat/rng.hpp"
#include "epistrat/scenario.hpp"
#include "epistrat/state.hpp"

namespace epistrat {

/// Identifies the binomial draw stream for one (ensemble member, day).
/// Each (stratum, transition) pair inside the step derives its own stream,
/// so results do not depend on evaluation order or thread scheduling.
struct StepKey {
  std::uint64_t seed = 0;
  std::uint64_t member = 0;
  std::uint64_t day = 0;
};

namespace detail {
inline RngStream transition_stream(const StepKey& key, std::uint64_t stratum,
                                   std::uint64_t channel) {
  return RngStream::from(key.seed, {key.member, key.day, stratum, channel});
}
}  // namespace detail

struct StepResult {
  StateMatrix next;
  std::vector<Count> se;
  std::vector<Count> ei;
  std::vector<Count> ir;
};

/// One chain-binomial step: per stratum draws
///   y_se ~ Binomial(x_S, 1-exp(-h_se dt)), and likewise for EI and IR,
/// then applies the update recursions.  Draws cannot overdraw, so counts
/// stay nonnegative and per-stratum totals are conserved exactly.
inline StepResult step(const StateMatrix& state, const HazardRates& hz, double dt,
                       const StepKey& key) {
  state.validate();
  const std::size_t L = state.num_strata();
  require(hz.se.size() == L && hz.ei.size() == L && hz.ir.size() == L, "invalid-argument",
          "hazard vectors disagree with the state on the number of strata");
  StepResult out;
  out.next = state;
  out.se.resize(L);
  out.ei.resize(L);
  out.ir.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    RngStream rng_se = detail::transition_stream(key, l, 0);
    RngStream rng_ei = detail::transition_stream(key, l, 1);
    RngStream rng_ir = detail::transition_stream(key, l, 2);
    const Count y_se = binomial_draw(rng_se, state.susceptible[l], transition_prob(hz.se[l], dt));
    const Count y_ei = binomial_draw(rng_ei, state.exposed[l], transition_prob(hz.ei[l], dt));
    const Count y_ir = binomial_draw(rng_ir, state.infectious[l], transition_prob(hz.ir[l], dt));
    out.next.susceptible[l] -= y_se;
    out.next.exposed[l] += y_se - y_ei;
    out.next.infectious[l] += y_ei - y_ir;
    out.next.removed[l] += y_ir;
    out.se[l] = y_se;
    out.ei[l] = y_ei;
    out.ir[l] = y_ir;
  }
  return out;
}

struct SimulationResult {
  Trajectory trajectory;
  bool depletion_clipped = false;
};

/// Forward-simulates the stratified chain-binomial system for `num_days`
/// days.  Deterministic given (seed, member).  Scenario hooks: depletion
/// adjusts the initial state, a mixing ramp makes the deprivation contact
/// matrix time-varying (ones + M*ramp), a behavioural ramp makes the
/// adaptation vector time-varying.  Scenario day 0 is the first simulated
/// day.  Days beyond the increment series hold the last drive value.
inline SimulationResult simulate(const StateMatrix& initial, const ModelParams& params,
                                 const Covariates& cov, const FixedConfig& cfg, int num_days,
                                 ModelVariant variant = ModelVariant::D,
                                 const std::optional<ScenarioSpec>& scenario = std::nullopt,
                                 std::uint64_t seed = 0, std::uint64_t member = 0) {
  require(num_days >= 1, "invalid-argument", "simulation horizon must be at least one day");
  cfg.validate();
  initial.validate();
  const std::size_t L = cov.population.size();
  require(initial.num_strata() == L, "invalid-argument",
          "initial state and covariates disagree on the number of strata");
  require(cov.day_effect.size() >= static_cast<std::size_t>(num_days), "invalid-argument",
          "day-of-week covariate shorter than the simulation horizon");

  SimulationResult out;
  StateMatrix start = initial;

  const MixingRampSpec* mixing_ramp = nullptr;
  const BehaviouralRampSpec* behavioural_ramp = nullptr;
  if (scenario) {
    if (const auto* depletion = std::get_if<DepletionSpec>(&*scenario)) {
      DepletionResult adjusted = apply_depletion(start, *depletion);
      start = adjusted.state;
      out.depletion_clipped = adjusted.clipped;
    } else if ((mixing_ramp = std::get_if<MixingRampSpec>(&*scenario))) {
      mixing_ramp->validate();
      require(mixing_ramp->u_diag.size() == cov.deprivation_index.size(), "invalid-scenario",
              "mixing ramp diagonal length must equal the number of deprivation groups");
    } else {
      behavioural_ramp = std::get_if<BehaviouralRampSpec>(&*scenario);
      behavioural_ramp->validate();
    }
  }

  const Matrix age_eff = effective_age_mixing(variant, cov.age_mixing);
  std::vector<double> chi =
      behavioural_adaptation(params.psi, params.rho, cov.deprivation_index, cfg, variant);

  // With an active ramp the deprivation matrix is ones + M*w(t); the Kronecker
  // product splits into a base part and a ramp part combined per day.
  Matrix kron_base;
  Matrix kron_ramp;
  if (mixing_ramp) {
    Matrix ones(cov.deprivation_mixing.rows, cov.deprivation_mixing.cols, 1.0);
    kron_base = kron_mixing(age_eff, ones);
    kron_ramp = kron_mixing(age_eff, build_M(*mixing_ramp));
  } else {
    kron_base = kron_mixing(age_eff, cov.deprivation_mixing);
  }

  const std::vector<double> drive = random_walk_drive(params.alpha0, params.alpha_inc);
  auto drive_on_day = [&](int t) {
    const std::size_t idx = static_cast<std::size_t>(t) + 1;
    return idx < drive.size() ? drive[idx] : drive.back();
  };

  Trajectory& traj = out.trajectory;
  traj.states.reserve(static_cast<std::size_t>(num_days) + 1);
  traj.states.push_back(start);
  traj.events = EventSeries(L, static_cast<std::size_t>(num_days));

  Matrix kron_day = kron_base;
  for (int t = 0; t < num_days; ++t) {
    const Matrix* kron = &kron_base;
    if (mixing_ramp) {
      const double w = ramp_weight(*mixing_ramp, static_cast<double>(t));
      for (std::size_t idx = 0; idx < kron_day.values.size(); ++idx)
        kron_day.values[idx] = kron_base.values[idx] + w * kron_ramp.values[idx];
      kron = &kron_day;
    }
    if (behavioural_ramp)
      chi = behavioural_at(params, *behavioural_ramp, cov.deprivation_index, cfg,
                           static_cast<double>(t));
    const HazardRates hz = hazards(traj.states.back().infectious, chi, *kron, cov.population,
                                   drive_on_day(t), params.gamma1, cov.day_effect[t], cfg);
    StepResult stepped = step(traj.states.back(), hz, cfg.delta_t,
                              StepKey{seed, member, static_cast<std::uint64_t>(t)});
    for (std::size_t l = 0; l < L; ++l) {
      traj.events.se(l, t) = stepped.se[l];
      traj.events.ei(l, t) = stepped.ei[l];
      traj.events.ir(l, t) = stepped.ir[l];
    }
    traj.states.push_back(std::move(stepped.next));
  }
  return out;
}

/// One posterior draw carried into forecasting: parameters plus the state at
/// the end of the training window.
struct ForecastDraw {
  ModelParams params;
  StateMatrix state;
};

/// Case-incidence forecast ensemble: one forward trajectory per posterior
/// draw, reporting IR events (cases) per stratum per day.  The transmission
/// drive is frozen at its end-of-training value unless `extend_drive` is set,
/// in which case fresh prior increments are drawn per day.  Draw order is
/// preserved; member m uses rng streams keyed by (seed, m).
inline std::vector<CountGrid> forecast_ensemble(const std::vector<ForecastDraw>& draws,
                                                const Covariates& cov, const FixedConfig& cfg,
                                                int horizon, ModelVariant variant,
                                                const std::optional<ScenarioSpec>& scenario,
                                                std::uint64_t seed, bool extend_drive = false) {
  require(!draws.empty(), "invalid-argument", "forecast needs at least one posterior draw");
  require(horizon >= 1, "invalid-argument", "forecast horizon must be at least one day");
  std::vector<CountGrid> incidence;
  incidence.reserve(draws.size());
  for (std::size_t m = 0; m < draws.size(); ++m) {
    ModelParams forward = draws[m].params;
    const std::vector<double> drive = random_walk_drive(forward.alpha0, forward.alpha_inc);
    forward.alpha0 = drive.back();
    forward.alpha_inc.clear();
    if (extend_drive) {
      RngStream rng = RngStream::from(seed, {m, 0x64726976ULL});  // drive-extension stream
      forward.alpha_inc.resize(static_cast<std::size_t>(horizon));
      for (double& inc : forward.alpha_inc) inc = normal_draw(rng, 0.0, cfg.sigma_alpha);
    }
    SimulationResult sim = simulate(draws[m].state, forward, cov, cfg, horizon, variant,
                                    scenario, seed, static_cast<std::uint64_t>(m));
    incidence.push_back(std::move(sim.trajectory.events.ir));
  }
  return incidence;
}

}  // namespace epistrat
