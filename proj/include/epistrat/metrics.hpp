#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "epistrat/common.hpp"
#include "epistrat/model.hpp"
#include "epistrat/simulate.hpp"
#include "epistrat/state.hpp"
#include "epistrat/strata.hpp"

namespace epistrat {

/// Linear-interpolation sample quantile (the convention used by most
/// statistics packages by default).  `p` in [0,1]; input need not be sorted.
inline double quantile(std::vector<double> values, double p) {
  require(!values.empty(), "invalid-argument", "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, "invalid-argument", "quantile level must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

inline double mean(const std::vector<double>& values) {
  require(!values.empty(), "invalid-argument", "mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

/// Empirical CRPS in the energy form E|X - y| - (1/2) E|X - X'|, with both
/// expectations over the empirical sample (all ordered pairs, self-pairs
/// included).  Zero exactly when every sample equals the observation.
inline double crps_empirical(const std::vector<double>& samples, double observation) {
  require(!samples.empty(), "invalid-argument", "CRPS needs at least one sample");
  const double m = static_cast<double>(samples.size());
  double term_obs = 0.0;
  for (double x : samples) term_obs += std::abs(x - observation);
  term_obs /= m;
  // Pair term via the sorted-sample identity: sum_{a<b} (x_b - x_a) weighted
  // by rank, equivalent to the O(m^2) double sum but a single pass.
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  double term_pair = 0.0;
  double prefix = 0.0;
  for (std::size_t b = 0; b < sorted.size(); ++b) {
    term_pair += static_cast<double>(b) * sorted[b] - prefix;
    prefix += sorted[b];
  }
  term_pair *= 2.0 / (m * m);  // ordered pairs double the a<b sum; self-pairs are zero
  return term_obs - 0.5 * term_pair;
}

/// Per-cell CRPS of a forecast ensemble against observed counts, with
/// quartiles over all strata-by-day cells.
struct CrpsTable {
  Matrix scores;  ///< strata x days
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

inline CrpsTable crps_table(const std::vector<CountGrid>& ensemble, const CountGrid& observed) {
  require(!ensemble.empty(), "invalid-argument", "CRPS table needs at least one ensemble member");
  for (const CountGrid& member : ensemble)
    require(member.same_shape(observed), "invalid-argument",
            "ensemble member shape does not match the observations");
  CrpsTable out;
  out.scores = Matrix(observed.rows, observed.cols, 0.0);
  std::vector<double> cell(ensemble.size());
  std::vector<double> all;
  all.reserve(observed.values.size());
  for (std::size_t l = 0; l < observed.rows; ++l) {
    for (std::size_t t = 0; t < observed.cols; ++t) {
      for (std::size_t m = 0; m < ensemble.size(); ++m)
        cell[m] = static_cast<double>(ensemble[m](l, t));
      const double score = crps_empirical(cell, static_cast<double>(observed(l, t)));
      out.scores(l, t) = score;
      all.push_back(score);
    }
  }
  out.q1 = quantile(all, 0.25);
  out.q2 = quantile(all, 0.50);
  out.q3 = quantile(all, 0.75);
  return out;
}

/// Expected number of onward infections from one infectious individual in
/// each stratum, given the current susceptible pool.  The denominator uses
/// the per-day removal probability; `literal_denominator` reproduces the
/// printed form 1 - exp(-gamma0 dt) instead (negative for gamma0 < 0, kept
/// only for comparison).
inline std::vector<double> reproduction_number(const std::vector<Count>& state_s,
                                               double drive_value,
                                               const std::vector<double>& chi, const Matrix& kron,
                                               const std::vector<double>& population,
                                               const FixedConfig& cfg,
                                               bool literal_denominator = false) {
  const std::size_t L = state_s.size();
  require(chi.size() == L && population.size() == L, "invalid-argument",
          "reproduction number inputs disagree on the number of strata");
  require(kron.rows == L && kron.cols == L, "invalid-argument",
          "mixing matrix does not match the number of strata");
  for (double n : population)
    require(n > 0.0, "invalid-argument", "stratum populations must be positive");
  const double dt = cfg.delta_t;
  const double removal = literal_denominator ? 1.0 - std::exp(-cfg.gamma0 * dt)
                                             : -std::expm1(-std::exp(cfg.gamma0) * dt);
  const double beta = std::exp(drive_value);
  std::vector<double> r(L);
  for (std::size_t j = 0; j < L; ++j) {
    double exponent = 0.0;
    for (std::size_t i = 0; i < L; ++i)
      exponent += static_cast<double>(state_s[i]) * (chi[i] / population[i]) *
                  (kron(i, j) / population[j]);
    r[j] = -std::expm1(-beta * dt * exponent) / removal;
  }
  return r;
}

/// Reproduction numbers across a set of posterior draws, with per-stratum
/// exceedance probabilities P(r_j > 1).  Each draw contributes its own
/// behavioural adaptation, end-of-window drive value, and susceptible pool.
struct RtEstimate {
  Matrix values;                   ///< draws x strata
  std::vector<double> exceedance;  ///< length strata
};

inline RtEstimate rt_estimate(const std::vector<ForecastDraw>& draws, const Covariates& cov,
                              const FixedConfig& cfg, ModelVariant variant = ModelVariant::D,
                              bool literal_denominator = false) {
  require(!draws.empty(), "invalid-argument", "reproduction number needs at least one draw");
  const std::size_t L = cov.population.size();
  const Matrix kron =
      kron_mixing(effective_age_mixing(variant, cov.age_mixing), cov.deprivation_mixing);
  RtEstimate out;
  out.values = Matrix(draws.size(), L, 0.0);
  out.exceedance.assign(L, 0.0);
  for (std::size_t m = 0; m < draws.size(); ++m) {
    const ForecastDraw& draw = draws[m];
    const std::vector<double> chi =
        behavioural_adaptation(draw.params.psi, draw.params.rho, cov.deprivation_index, cfg,
                               variant);
    const std::vector<double> drive =
        random_walk_drive(draw.params.alpha0, draw.params.alpha_inc);
    const std::vector<double> r = reproduction_number(
        draw.state.susceptible, drive.back(), chi, kron, cov.population, cfg,
        literal_denominator);
    for (std::size_t j = 0; j < L; ++j) {
      out.values(m, j) = r[j];
      if (r[j] > 1.0) out.exceedance[j] += 1.0;
    }
  }
  for (double& e : out.exceedance) e /= static_cast<double>(draws.size());
  return out;
}

/// Axis kept after aggregation: by age collapses deprivation groups, by IMD
/// collapses age groups, none collapses everything to a single series.
enum class AggregateAxis { Age, Imd, None };

inline AggregateAxis parse_aggregate_axis(const std::string& name) {
  if (name == "age") return AggregateAxis::Age;
  if (name == "imd") return AggregateAxis::Imd;
  if (name == "none") return AggregateAxis::None;
  fail("invalid-argument", "unknown aggregation axis '" + name + "' (expected age, imd or none)");
}

/// Sums a strata-by-day grid across the collapsed axis.  With `per100k` the
/// sums are scaled by 1e5 over the group population.
inline Matrix aggregate(const CountGrid& data, const StrataLayout& layout, AggregateAxis by,
                        bool per100k = false, const std::vector<double>& population = {}) {
  require(data.rows == static_cast<std::size_t>(layout.num_strata()), "invalid-argument",
          "data grid does not match the stratum layout");
  std::size_t groups = 1;
  if (by == AggregateAxis::Age) groups = static_cast<std::size_t>(layout.num_age);
  if (by == AggregateAxis::Imd) groups = static_cast<std::size_t>(layout.num_deprivation);
  auto group_of = [&](std::size_t stratum) -> std::size_t {
    const auto idx = layout.unflat(static_cast<int>(stratum));
    if (by == AggregateAxis::Age) return static_cast<std::size_t>(idx.age_k);
    if (by == AggregateAxis::Imd) return static_cast<std::size_t>(idx.dep_j);
    return 0;
  };
  Matrix out(groups, data.cols, 0.0);
  for (std::size_t l = 0; l < data.rows; ++l)
    for (std::size_t t = 0; t < data.cols; ++t)
      out(group_of(l), t) += static_cast<double>(data(l, t));
  if (per100k) {
    require(population.size() == data.rows, "invalid-argument",
            "per-100k aggregation needs one population value per stratum");
    std::vector<double> group_pop(groups, 0.0);
    for (std::size_t l = 0; l < data.rows; ++l) group_pop[group_of(l)] += population[l];
    for (std::size_t g = 0; g < groups; ++g) {
      require(group_pop[g] > 0.0, "invalid-argument", "aggregation group has zero population");
      for (std::size_t t = 0; t < data.cols; ++t) out(g, t) *= 1e5 / group_pop[g];
    }
  }
  return out;
}

}  // namespace epistrat
