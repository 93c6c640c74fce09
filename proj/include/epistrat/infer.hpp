#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epistrat/common.hpp"
#include "epistrat/model.hpp"
#include "epistrat/rng.hpp"
#include "epistrat/state.hpp"

namespace epistrat {

/// Latent augmentation of the observed case series: unobserved infection
/// (SE) and symptom-onset (EI) event counts per stratum per day.  The IR
/// events are the observed cases and stay fixed throughout inference.
struct LatentPath {
  CountGrid se;
  CountGrid ei;

  LatentPath() = default;
  LatentPath(std::size_t num_strata, std::size_t num_days)
      : se(num_strata, num_days, 0), ei(num_strata, num_days, 0) {}
};

/// Everything the sampler conditions on: the observed case grid, the fixed
/// initial state, and the covariates for the training window.
struct FitData {
  CountGrid cases;      ///< observed IR events, strata x days
  StateMatrix initial;  ///< state at the start of the first observed day
  Covariates cov;       ///< day_effect must cover every observed day

  void validate() const {
    initial.validate();
    require(cases.rows == initial.num_strata(), "invalid-argument",
            "case grid and initial state disagree on the number of strata");
    require(cases.cols >= 1, "invalid-argument", "case grid must cover at least one day");
    require(cov.day_effect.size() >= cases.cols, "invalid-argument",
            "day-of-week covariate shorter than the observed window");
    require(cov.population.size() == cases.rows, "invalid-argument",
            "population vector and case grid disagree on the number of strata");
    for (Count c : cases.values)
      require(c >= 0, "invalid-argument", "observed case counts must be nonnegative");
  }
};

/// Lazily grown table of log-factorials, so binomial coefficients inside the
/// likelihood are table lookups instead of repeated lgamma calls.
class LogChooseTable {
 public:
  double operator()(Count n, Count k) const {
    ensure(static_cast<std::size_t>(n) + 1);
    return lg_[static_cast<std::size_t>(n)] - lg_[static_cast<std::size_t>(k)] -
           lg_[static_cast<std::size_t>(n - k)];
  }

 private:
  void ensure(std::size_t size) const {
    if (lg_.size() >= size) return;
    std::size_t old = lg_.size();
    if (old == 0) {
      lg_.push_back(0.0);  // log 0! = 0
      old = 1;
    }
    lg_.resize(std::max(size, old * 2));
    for (std::size_t n = old; n < lg_.size(); ++n)
      lg_[n] = lg_[n - 1] + std::log(static_cast<double>(n));
  }

  mutable std::vector<double> lg_;
};

namespace detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log pmf of Binomial(n, p) at y, with -inf outside the support.  `log_p`
/// and `log_1mp` are passed in so callers can use exact stable forms.
inline double binomial_log_pmf(Count y, Count n, double log_p, double log_1mp,
                               const LogChooseTable& table) {
  if (y < 0 || y > n) return kNegInf;
  double out = table(n, y);
  if (y > 0) {
    if (log_p == kNegInf) return kNegInf;
    out += static_cast<double>(y) * log_p;
  }
  if (n - y > 0) {
    if (log_1mp == kNegInf) return kNegInf;
    out += static_cast<double>(n - y) * log_1mp;
  }
  return out;
}

inline double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

inline double expit(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace detail

struct LikelihoodResult {
  double log_lik = detail::kNegInf;
  std::vector<StateMatrix> states;  ///< reconstructed states, one per day plus the end state
};

/// Complete-data log likelihood of (latent SE/EI events, observed IR events)
/// given parameters, including the binomial coefficients.  States are
/// reconstructed deterministically from the initial state and the events;
/// any overdraw (events exceeding the source compartment at the start of the
/// day) puts the path outside the support and yields -inf.
inline LikelihoodResult log_likelihood_detail(const FitData& data, const LatentPath& latents,
                                              const ModelParams& params, const FixedConfig& cfg,
                                              ModelVariant variant, const LogChooseTable& table) {
  const std::size_t L = data.cases.rows;
  const std::size_t T = data.cases.cols;
  require(latents.se.rows == L && latents.se.cols == T && latents.ei.rows == L &&
              latents.ei.cols == T,
          "invalid-argument", "latent event grids must match the case grid shape");
  require(params.alpha_inc.size() == T, "invalid-argument",
          "drive increments must provide one value per observed day");

  LikelihoodResult out;
  out.states.reserve(T + 1);
  out.states.push_back(data.initial);

  const std::vector<double> chi =
      behavioural_adaptation(params.psi, params.rho, data.cov.deprivation_index, cfg, variant);
  const Matrix kron = kron_mixing(effective_age_mixing(variant, data.cov.age_mixing),
                                  data.cov.deprivation_mixing);
  const std::vector<double> drive = random_walk_drive(params.alpha0, params.alpha_inc);

  const double dt = cfg.delta_t;
  const double p_ei = transition_prob(cfg.nu, dt);
  const double log_p_ei = std::log(p_ei);
  const double log_1mp_ei = -cfg.nu * dt;

  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const StateMatrix& now = out.states.back();
    const HazardRates hz = hazards(now.infectious, chi, kron, data.cov.population, drive[t + 1],
                                   params.gamma1, data.cov.day_effect[t], cfg);
    const double log_p_ir = std::log(transition_prob(hz.ir[0], dt));
    const double log_1mp_ir = -hz.ir[0] * dt;

    StateMatrix next = now;
    for (std::size_t l = 0; l < L; ++l) {
      const Count y_se = latents.se(l, t);
      const Count y_ei = latents.ei(l, t);
      const Count y_ir = data.cases(l, t);

      const double exponent = hz.se[l] * dt;
      const double log_p_se = exponent > 0.0 ? std::log1p(-std::exp(-exponent)) : detail::kNegInf;
      const double log_1mp_se = -exponent;

      const double term_se =
          detail::binomial_log_pmf(y_se, now.susceptible[l], log_p_se, log_1mp_se, table);
      const double term_ei =
          detail::binomial_log_pmf(y_ei, now.exposed[l], log_p_ei, log_1mp_ei, table);
      const double term_ir =
          detail::binomial_log_pmf(y_ir, now.infectious[l], log_p_ir, log_1mp_ir, table);
      if (term_se == detail::kNegInf || term_ei == detail::kNegInf ||
          term_ir == detail::kNegInf) {
        out.log_lik = detail::kNegInf;
        out.states.clear();
        return out;
      }
      total += term_se + term_ei + term_ir;

      next.susceptible[l] -= y_se;
      next.exposed[l] += y_se - y_ei;
      next.infectious[l] += y_ei - y_ir;
      next.removed[l] += y_ir;
    }
    out.states.push_back(std::move(next));
  }
  out.log_lik = total;
  return out;
}

inline double log_likelihood(const FitData& data, const LatentPath& latents,
                             const ModelParams& params, const FixedConfig& cfg,
                             ModelVariant variant = ModelVariant::D) {
  LogChooseTable table;
  return log_likelihood_detail(data, latents, params, cfg, variant, table).log_lik;
}

/// Log prior density: psi_k, rho_k iid Beta(1,1) on (0,1); gamma1 and alpha0
/// Gaussian; drive increments iid Gaussian with the daily innovation sd.
inline double log_prior(const ModelParams& params, const FixedConfig& cfg) {
  for (double p : params.psi)
    if (!(p > 0.0 && p < 1.0)) return detail::kNegInf;
  for (double p : params.rho)
    if (!(p > 0.0 && p < 1.0)) return detail::kNegInf;
  double out = 0.0;  // Beta(1,1) contributes 0 inside the unit interval
  out += detail::log_normal_pdf(params.gamma1, 0.0, cfg.sigma_gamma1);
  out += detail::log_normal_pdf(params.alpha0, 0.0, cfg.sigma_alpha0);
  for (double inc : params.alpha_inc) out += detail::log_normal_pdf(inc, 0.0, cfg.sigma_alpha);
  return out;
}

/// Builds a feasible starting latent path by shifting observed cases back
/// through the mean infectious and latent periods, then repairing any
/// overdraws against the fixed initial state.  Throws with category
/// "infeasible" when no repair exists (e.g. day-0 cases exceed the initial
/// infectious pool).
inline LatentPath initialize_latents(const FitData& data, const FixedConfig& cfg) {
  data.validate();
  const std::size_t L = data.cases.rows;
  const std::size_t T = data.cases.cols;
  const long d_inf = std::lround(1.0 / std::exp(cfg.gamma0));
  const long d_lat = std::lround(1.0 / cfg.nu);

  LatentPath path(L, T);
  // A one-day window has no room for back-shifted events; the all-zero path
  // is the only candidate and the repair loop below validates it.
  if (T >= 2) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t t = 0; t < T; ++t) {
        const Count cases = data.cases(l, t);
        if (cases == 0) continue;
        // EI events no earlier than day 1 so they can be fed by day-0 SE events.
        const long ei_day =
            std::clamp<long>(static_cast<long>(t) - d_inf, 1, static_cast<long>(T) - 1);
        const long se_day = std::clamp<long>(ei_day - d_lat, 0, ei_day - 1);
        path.ei(l, static_cast<std::size_t>(ei_day)) += cases;
        path.se(l, static_cast<std::size_t>(se_day)) += cases;
      }
    }
  }

  const int max_passes = 500;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (std::size_t l = 0; l < L && !changed; ++l) {
      Count s = data.initial.susceptible[l];
      Count e = data.initial.exposed[l];
      Count i = data.initial.infectious[l];
      for (std::size_t t = 0; t < T; ++t) {
        if (path.se(l, t) > s) {  // infection events exhausted the susceptibles
          path.se(l, t) = s;
          changed = true;
          break;
        }
        if (path.ei(l, t) > e) {
          const Count excess = path.ei(l, t) - e;
          if (t == 0) {
            path.ei(l, 0) = e;
            path.ei(l, 1) += excess;  // defer; a later pass backfills SE events
          } else {
            path.se(l, t - 1) += excess;  // extra infections a day earlier feed the onsets
          }
          changed = true;
          break;
        }
        if (data.cases(l, t) > i) {
          const Count excess = data.cases(l, t) - i;
          require(t >= 1, "infeasible",
                  "observed cases on the first day exceed the initial infectious pool");
          path.ei(l, t - 1) += excess;
          if (t >= 2)
            path.se(l, t - 2) += excess;
          else
            path.se(l, 0) += excess;
          changed = true;
          break;
        }
        s -= path.se(l, t);
        e += path.se(l, t) - path.ei(l, t);
        i += path.ei(l, t) - data.cases(l, t);
      }
    }
    if (!changed) return path;
  }
  fail("infeasible", "could not construct a feasible latent path for the observed cases");
}

/// Sampler settings.  Adaptation of proposal scales runs during burn-in only;
/// the recorded samples come from the fixed-kernel phase.
struct ChainConfig {
  int iterations = 20000;  ///< total iterations including burn-in
  int burn_in = 10000;
  int thinning = 10;
  std::uint64_t seed = 1;
  ModelVariant variant = ModelVariant::D;
  bool prior_only = false;        ///< ignore the likelihood (prior-sampling check)
  bool update_theta = true;       ///< disable to test latent moves in isolation
  bool update_latents = true;
  bool store_latents = false;     ///< attach the latent path to each sample
  double theta_target_accept = 0.234;
  double latent_target_accept = 0.40;
  int latent_moves_per_iter = 0;  ///< 0 = auto (scales with strata x days)
  double alpha_site_fraction = 1.0;  ///< fraction of drive increments updated per iteration
  int shift_max_days = 4;            ///< initial half-width of the event shift move

  void validate() const {
    require(iterations >= 1, "invalid-configuration", "chain needs at least one iteration");
    require(burn_in >= 0 && burn_in < iterations, "invalid-configuration",
            "burn-in must be shorter than the chain");
    require(thinning >= 1, "invalid-configuration", "thinning interval must be positive");
    require(theta_target_accept > 0.0 && theta_target_accept < 1.0 &&
                latent_target_accept > 0.0 && latent_target_accept < 1.0,
            "invalid-configuration", "target acceptance rates must lie in (0,1)");
    require(alpha_site_fraction > 0.0 && alpha_site_fraction <= 1.0, "invalid-configuration",
            "drive update fraction must lie in (0,1]");
    require(shift_max_days >= 1, "invalid-configuration",
            "event shift half-width must be at least one day");
    require(latent_moves_per_iter >= 0, "invalid-configuration",
            "latent moves per iteration cannot be negative");
  }
};

struct PosteriorSample {
  ModelParams params;
  StateMatrix terminal_state;  ///< reconstructed state at the end of the window
  double log_posterior = 0.0;
  int iteration = 0;
  std::optional<LatentPath> latents;
};

struct AcceptanceStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed; }
};

struct ChainResult {
  std::vector<PosteriorSample> samples;
  std::map<std::string, AcceptanceStats> acceptance;
  std::map<std::string, double> final_scales;
};

namespace detail {

/// Robbins-Monro step size for proposal-scale adaptation.
inline double adapt_gain(std::uint64_t n) { return std::pow(static_cast<double>(n), -0.6); }

class Sampler {
 public:
  Sampler(const FitData& data, const FixedConfig& cfg, const ChainConfig& chain,
          std::optional<ModelParams> init_params, std::optional<LatentPath> init_latents)
      : data_(data),
        cfg_(cfg),
        chain_(chain),
        rng_(RngStream::from(chain.seed, {0x6d636d63ULL})),
        L_(data.cases.rows),
        T_(data.cases.cols) {
    data_.validate();
    cfg_.validate();
    chain_.validate();
    const int K = layout_num_age();

    if (init_params) {
      params_ = *init_params;
    } else {
      params_.psi.assign(static_cast<std::size_t>(K), 0.5);
      params_.rho.assign(static_cast<std::size_t>(K), 0.5);
      params_.gamma1 = 0.0;
      params_.alpha_inc.assign(T_, 0.0);
      // Start the drive where one infectious individual causes roughly one
      // removal-rate's worth of onward infections: the right order of
      // magnitude for any layout, which keeps burn-in short.
      const std::vector<double> chi = behavioural_adaptation(
          params_.psi, params_.rho, data_.cov.deprivation_index, cfg_, chain_.variant);
      const Matrix kron = kron_mixing(effective_age_mixing(chain_.variant, data_.cov.age_mixing),
                                      data_.cov.deprivation_mixing);
      double weighted = 0.0;
      double total = 0.0;
      for (std::size_t i = 0; i < L_; ++i) {
        double row = 0.0;
        for (std::size_t l = 0; l < L_; ++l) row += kron(i, l);
        weighted += chi[i] * row;
        total += data_.cov.population[i];
      }
      params_.alpha0 =
          weighted > 0.0 ? std::log(std::exp(cfg_.gamma0) * total / weighted) : 0.0;
    }
    require(params_.alpha_inc.size() == T_, "invalid-argument",
            "initial parameters must carry one drive increment per observed day");
    params_.validate(K);

    latents_ = init_latents ? *init_latents : initialize_latents(data_, cfg_);
    require(latents_.se.rows == L_ && latents_.se.cols == T_, "invalid-argument",
            "initial latent path does not match the case grid shape");

    psi_scale_.assign(params_.psi.size(), 0.5);
    rho_scale_.assign(params_.rho.size(), 0.5);
    inc_scale_.assign(T_, 0.01);

    refresh_cached_density();
    require(chain_.prior_only || cur_lik_ != kNegInf, "infeasible",
            "initial latent path has zero likelihood");
  }

  ChainResult run() {
    ChainResult out;
    const int expected =
        (chain_.iterations - chain_.burn_in + chain_.thinning - 1) / chain_.thinning;
    out.samples.reserve(static_cast<std::size_t>(std::max(expected, 0)));

    const int latent_moves = chain_.latent_moves_per_iter > 0
                                 ? chain_.latent_moves_per_iter
                                 : static_cast<int>(std::max<std::size_t>(20, L_ * T_ / 20));

    for (int it = 0; it < chain_.iterations; ++it) {
      adapting_ = it < chain_.burn_in;
      if (chain_.update_theta) update_theta();
      if (chain_.update_latents && !chain_.prior_only)
        for (int m = 0; m < latent_moves; ++m) update_latents();
      if (it >= chain_.burn_in && (it - chain_.burn_in) % chain_.thinning == 0)
        record(out, it);
    }

    out.acceptance = stats_;
    out.final_scales["gamma1"] = gamma1_scale_;
    out.final_scales["alpha0"] = alpha0_scale_;
    out.final_scales["shift"] = shift_scale_;
    for (std::size_t k = 0; k < psi_scale_.size(); ++k)
      out.final_scales["psi" + std::to_string(k)] = psi_scale_[k];
    for (std::size_t k = 0; k < rho_scale_.size(); ++k)
      out.final_scales["rho" + std::to_string(k)] = rho_scale_[k];
    return out;
  }

 private:
  int layout_num_age() const {
    const std::size_t J = data_.cov.deprivation_index.size();
    require(J > 0 && L_ % J == 0, "invalid-argument",
            "number of strata is not a multiple of the number of deprivation groups");
    return static_cast<int>(L_ / J);
  }

  void refresh_cached_density() {
    if (chain_.prior_only) {
      cur_lik_ = 0.0;
      cur_states_.assign(1, data_.initial);
    } else {
      LikelihoodResult res =
          log_likelihood_detail(data_, latents_, params_, cfg_, chain_.variant, table_);
      cur_lik_ = res.log_lik;
      cur_states_ = std::move(res.states);
    }
    cur_prior_ = log_prior(params_, cfg_);
  }

  double likelihood_of(const ModelParams& cand) {
    if (chain_.prior_only) return 0.0;
    return log_likelihood_detail(data_, latents_, cand, cfg_, chain_.variant, table_).log_lik;
  }

  /// Generic scalar Metropolis step in the natural space.
  void metropolis_scalar(double& coord, double& scale, const std::string& label) {
    AcceptanceStats& st = stats_[label];
    ++st.proposed;
    const double old = coord;
    coord = old + scale * normal_draw(rng_, 0.0, 1.0);
    const double cand_prior = log_prior(params_, cfg_);
    const double cand_lik = likelihood_of(params_);
    const bool ok = accept(cand_lik - cur_lik_ + cand_prior - cur_prior_);
    if (ok) {
      ++st.accepted;
      cur_prior_ = cand_prior;
      cur_lik_ = cand_lik;
    } else {
      coord = old;
    }
    adapt(scale, st.proposed, ok, chain_.theta_target_accept);
  }

  /// Metropolis step for a unit-interval coordinate, proposing on the logit
  /// scale; the Jacobian ratio keeps the target in the natural space.
  void metropolis_unit(double& coord, double& scale, const std::string& label) {
    AcceptanceStats& st = stats_[label];
    ++st.proposed;
    const double old = coord;
    const double u = logit(old) + scale * normal_draw(rng_, 0.0, 1.0);
    coord = expit(u);
    bool ok = coord > 0.0 && coord < 1.0;
    if (ok) {
      const double cand_prior = log_prior(params_, cfg_);
      const double cand_lik = likelihood_of(params_);
      const double jac = std::log(coord) + std::log1p(-coord) - std::log(old) - std::log1p(-old);
      ok = accept(cand_lik - cur_lik_ + cand_prior - cur_prior_ + jac);
      if (ok) {
        ++st.accepted;
        cur_prior_ = cand_prior;
        cur_lik_ = cand_lik;
      }
    }
    if (!ok) coord = old;
    adapt(scale, st.proposed, ok, chain_.theta_target_accept);
  }

  void update_theta() {
    const bool use_psi = chain_.variant == ModelVariant::D;
    const bool use_rho = chain_.variant == ModelVariant::C || chain_.variant == ModelVariant::D;
    if (use_psi)
      for (std::size_t k = 0; k < params_.psi.size(); ++k)
        metropolis_unit(params_.psi[k], psi_scale_[k], "psi");
    if (use_rho)
      for (std::size_t k = 0; k < params_.rho.size(); ++k)
        metropolis_unit(params_.rho[k], rho_scale_[k], "rho");
    metropolis_scalar(params_.gamma1, gamma1_scale_, "gamma1");
    metropolis_scalar(params_.alpha0, alpha0_scale_, "alpha0");
    if (chain_.alpha_site_fraction >= 1.0) {
      for (std::size_t t = 0; t < T_; ++t)
        metropolis_scalar(params_.alpha_inc[t], inc_scale_[t], "alpha_inc");
    } else {
      const auto sites = static_cast<std::size_t>(
          std::max(1.0, chain_.alpha_site_fraction * static_cast<double>(T_)));
      for (std::size_t n = 0; n < sites; ++n) {
        const std::size_t t = static_cast<std::size_t>(rng_() % T_);
        metropolis_scalar(params_.alpha_inc[t], inc_scale_[t], "alpha_inc");
      }
    }
  }

  // --- latent event moves ------------------------------------------------
  //
  // All moves pick cells uniformly, which makes each proposal kernel
  // symmetric: the reverse move picks the same cells with the same
  // probability.  Acceptance therefore only needs the likelihood ratio.
  // Support violations surface as -inf likelihood and are rejected.

  void update_latents() {
    const double u = uniform01(rng_);
    if (u < 0.4)
      move_shift();
    else if (u < 0.7)
      move_pair();
    else if (u < 0.85)
      move_single(latents_.se, "latent_single_se");
    else
      move_single(latents_.ei, "latent_single_ei");
  }

  void move_shift() {
    AcceptanceStats& st = stats_["latent_shift"];
    ++st.proposed;
    CountGrid& grid = (rng_() & 1u) ? latents_.se : latents_.ei;
    const std::size_t l = static_cast<std::size_t>(rng_() % L_);
    const std::size_t t = static_cast<std::size_t>(rng_() % T_);
    const int delta = std::max(1, static_cast<int>(std::llround(shift_scale_)));
    int d = 1 + static_cast<int>(rng_() % static_cast<std::uint64_t>(delta));
    if (rng_() & 1u) d = -d;
    const long target = static_cast<long>(t) + d;
    bool ok = grid(l, t) > 0 && target >= 0 && target < static_cast<long>(T_);
    if (ok) {
      grid(l, t) -= 1;
      grid(l, static_cast<std::size_t>(target)) += 1;
      ok = accept_latent();
      if (!ok) {
        grid(l, t) += 1;
        grid(l, static_cast<std::size_t>(target)) -= 1;
      }
    }
    if (ok) ++st.accepted;
    adapt(shift_scale_, st.proposed, ok, chain_.latent_target_accept);
    shift_scale_ = std::clamp(shift_scale_, 1.0, static_cast<double>(T_));
  }

  /// Adds or removes a matched (infection at t1, onset at t2 > t1) pair,
  /// which preserves the end-of-window exposed balance.
  void move_pair() {
    AcceptanceStats& st = stats_["latent_pair"];
    ++st.proposed;
    if (T_ < 2) return;
    const bool add = rng_() & 1u;
    const std::size_t l = static_cast<std::size_t>(rng_() % L_);
    const std::size_t t1 = static_cast<std::size_t>(rng_() % (T_ - 1));
    const std::size_t t2 = t1 + 1 + static_cast<std::size_t>(rng_() % (T_ - 1 - t1));
    const Count sign = add ? 1 : -1;
    bool ok = add || (latents_.se(l, t1) >= 1 && latents_.ei(l, t2) >= 1);
    if (ok) {
      latents_.se(l, t1) += sign;
      latents_.ei(l, t2) += sign;
      ok = accept_latent();
      if (!ok) {
        latents_.se(l, t1) -= sign;
        latents_.ei(l, t2) -= sign;
      }
    }
    if (ok) ++st.accepted;
  }

  void move_single(CountGrid& grid, const std::string& label) {
    AcceptanceStats& st = stats_[label];
    ++st.proposed;
    const bool add = rng_() & 1u;
    const std::size_t l = static_cast<std::size_t>(rng_() % L_);
    const std::size_t t = static_cast<std::size_t>(rng_() % T_);
    const Count sign = add ? 1 : -1;
    bool ok = add || grid(l, t) >= 1;
    if (ok) {
      grid(l, t) += sign;
      ok = accept_latent();
      if (!ok) grid(l, t) -= sign;
    }
    if (ok) ++st.accepted;
  }

  /// Evaluates the modified latent path in place and accepts or rejects.
  bool accept_latent() {
    LikelihoodResult res =
        log_likelihood_detail(data_, latents_, params_, cfg_, chain_.variant, table_);
    if (!accept(res.log_lik - cur_lik_)) return false;
    cur_lik_ = res.log_lik;
    cur_states_ = std::move(res.states);
    return true;
  }

  bool accept(double log_ratio) {
    if (log_ratio >= 0.0) return true;
    if (!(log_ratio > kNegInf)) return false;
    return std::log(uniform01(rng_)) < log_ratio;
  }

  void adapt(double& scale, std::uint64_t num_proposed, bool accepted, double target) {
    if (!adapting_) return;
    const double step = adapt_gain(num_proposed) * ((accepted ? 1.0 : 0.0) - target);
    scale = std::clamp(scale * std::exp(step), 1e-8, 1e3);
  }

  void record(ChainResult& out, int it) {
    PosteriorSample sample;
    sample.params = params_;
    sample.terminal_state = cur_states_.empty() ? data_.initial : cur_states_.back();
    sample.log_posterior = cur_lik_ + cur_prior_;
    sample.iteration = it;
    if (chain_.store_latents) sample.latents = latents_;
    out.samples.push_back(std::move(sample));
  }

  FitData data_;
  FixedConfig cfg_;
  ChainConfig chain_;
  RngStream rng_;
  std::size_t L_;
  std::size_t T_;

  ModelParams params_;
  LatentPath latents_;
  LogChooseTable table_;
  double cur_lik_ = kNegInf;
  double cur_prior_ = kNegInf;
  std::vector<StateMatrix> cur_states_;
  bool adapting_ = true;

  std::vector<double> psi_scale_;
  std::vector<double> rho_scale_;
  double gamma1_scale_ = 0.5;
  double alpha0_scale_ = 0.2;
  std::vector<double> inc_scale_;
  double shift_scale_ = 4.0;

  std::map<std::string, AcceptanceStats> stats_;
};

}  // namespace detail

/// Runs the augmented-data Metropolis-within-Gibbs chain and returns thinned
/// post-burn-in samples.  Parameters without likelihood influence under the
/// chosen variant (psi outside D, rho outside C/D) are kept at their initial
/// values.  Optional overrides pin the starting point, which the tests use to
/// probe individual kernels.
inline ChainResult run_chain(const FitData& data, const FixedConfig& cfg,
                             const ChainConfig& chain,
                             std::optional<ModelParams> init_params = std::nullopt,
                             std::optional<LatentPath> init_latents = std::nullopt) {
  detail::Sampler sampler(data, cfg, chain, std::move(init_params), std::move(init_latents));
  return sampler.run();
}

}  // namespace epistrat
