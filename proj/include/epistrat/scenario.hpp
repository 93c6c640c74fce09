#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epistrat/common.hpp"
#include "epistrat/model.hpp"
#include "epistrat/state.hpp"

namespace epistrat {

enum class MixingForm { Full, Assortative, Disassortative };

inline MixingForm parse_mixing_form(const std::string& name) {
  if (name == "full") return MixingForm::Full;
  if (name == "assortative") return MixingForm::Assortative;
  if (name == "disassortative") return MixingForm::Disassortative;
  fail("invalid-configuration", "unknown mixing form '" + name + "'");
}

inline std::string mixing_form_name(MixingForm f) {
  switch (f) {
    case MixingForm::Full: return "full";
    case MixingForm::Assortative: return "assortative";
    case MixingForm::Disassortative: return "disassortative";
  }
  return "?";
}

/// Time-ramped deprivation mixing.  The base matrix M is built from an upper
/// triangular U with constant rows (u[i][j] = u[i][i] for j >= i) and a
/// strictly increasing diagonal, so less deprived groups ramp faster.  The
/// ramp is linear with slope omega after a lag of lag_days.
struct MixingRampSpec {
  std::vector<double> u_diag;  // diagonal of U, strictly increasing
  MixingForm form = MixingForm::Full;
  double omega = 0.0;          // per-day slope
  double lag_days = 0.0;       // t'

  void validate() const {
    require(!u_diag.empty(), "invalid-scenario", "mixing ramp needs a nonempty diagonal");
    for (std::size_t i = 0; i < u_diag.size(); ++i) {
      require(u_diag[i] >= 0.0, "invalid-scenario", "mixing diagonal entries must be nonnegative");
      if (i > 0)
        require(u_diag[i] > u_diag[i - 1], "invalid-scenario",
                "mixing diagonal must be strictly increasing");
    }
    require(omega >= 0.0 && lag_days >= 0.0, "invalid-scenario",
            "mixing ramp slope and lag must be nonnegative");
  }
};

/// Time-varying behavioural adaptation: slope parameters drift by epsilon per
/// day (clamped to [-1/2, 1/2]) and the whole vector is scaled by zeta.
struct BehaviouralRampSpec {
  double zeta = 1.0;     // global multiplier
  double epsilon = 0.0;  // per-day drift of the slope parameters

  void validate() const {
    require(zeta > 0.0, "invalid-scenario", "behavioural multiplier zeta must be positive");
    require(epsilon >= 0.0, "invalid-scenario", "behavioural drift epsilon must be nonnegative");
  }
};

/// Moves factor * cumulative observed cases from the initial susceptible to
/// the initial removed compartment, clipping at zero susceptibles.
struct DepletionSpec {
  std::vector<Count> cumulative_cases;  // per stratum; filled from data
  double factor = 0.0;

  void validate() const {
    require(factor >= 0.0, "invalid-scenario", "depletion factor must be nonnegative");
  }
};

using ScenarioSpec = std::variant<DepletionSpec, MixingRampSpec, BehaviouralRampSpec>;

/// Builds the J x J deprivation perturbation matrix M for a ramp spec.
/// With the constant-row upper triangular structure the full form has
/// M[i][j] = u_min(i,j); the assortative form keeps only the diagonal; the
/// disassortative form zeroes the diagonal.  All forms are symmetric.
inline Matrix build_M(const MixingRampSpec& spec) {
  spec.validate();
  const std::size_t J = spec.u_diag.size();
  Matrix m(J, J, 0.0);
  for (std::size_t i = 0; i < J; ++i)
    for (std::size_t j = 0; j < J; ++j) {
      const double off = spec.u_diag[std::min(i, j)];
      switch (spec.form) {
        case MixingForm::Full: m(i, j) = off; break;
        case MixingForm::Assortative: m(i, j) = (i == j) ? spec.u_diag[i] : 0.0; break;
        case MixingForm::Disassortative: m(i, j) = (i == j) ? 0.0 : off; break;
      }
    }
  return m;
}

/// Ramp weight at day t: omega * (t - lag) once the lag has passed, else 0.
inline double ramp_weight(const MixingRampSpec& spec, double t) {
  return t > spec.lag_days ? spec.omega * (t - spec.lag_days) : 0.0;
}

/// Deprivation mixing matrix at day t: ones + M * ramp_weight(t).
inline Matrix mixing_at(const MixingRampSpec& spec, double t) {
  require(t >= 0.0, "invalid-argument", "scenario time must be nonnegative");
  Matrix m = build_M(spec);
  const double w = ramp_weight(spec, t);
  Matrix out(m.rows, m.cols, 1.0);
  for (std::size_t idx = 0; idx < m.values.size(); ++idx) out.values[idx] += m.values[idx] * w;
  return out;
}

/// Behavioural adaptation vector at scenario day t.  The slope parameter per
/// age group drifts as rho_tilde - epsilon*t, clamped to [-1/2, 1/2]; the
/// result is scaled by zeta.  At t = 0 with zeta = 1 this equals the
/// unperturbed adaptation vector.
inline std::vector<double> behavioural_at(const ModelParams& params,
                                          const BehaviouralRampSpec& spec,
                                          const std::vector<double>& deprivation_index,
                                          const FixedConfig& cfg, double t) {
  spec.validate();
  require(t >= 0.0, "invalid-argument", "scenario time must be nonnegative");
  const std::vector<double> psi_tilde = center(params.psi);
  const std::vector<double> f = deprivation_slope_shape(center(deprivation_index), cfg.xi);
  const std::size_t K = params.psi.size();
  const std::size_t J = deprivation_index.size();
  std::vector<double> chi(K * J);
  for (std::size_t k = 0; k < K; ++k) {
    const double drifted = std::clamp(params.rho[k] - 0.5 - spec.epsilon * t, -0.5, 0.5);
    for (std::size_t j = 0; j < J; ++j) {
      const double value =
          (cfg.phi * (1.0 + psi_tilde[k]) + cfg.eta * (0.5 + drifted * f[j])) * spec.zeta;
      require(value > 0.0, "invalid-scenario",
              "behavioural ramp produced a nonpositive adaptation element");
      chi[k * J + j] = value;
    }
  }
  return chi;
}

struct DepletionResult {
  StateMatrix state;
  bool clipped = false;  // set when a stratum ran out of susceptibles
};

/// Applies susceptible depletion to an initial state.  Per-stratum totals are
/// preserved exactly; the moved amount is rounded half-up and truncated where
/// it would exceed the available susceptibles.
inline DepletionResult apply_depletion(const StateMatrix& initial, const DepletionSpec& spec) {
  spec.validate();
  require(spec.cumulative_cases.size() == initial.num_strata(), "invalid-scenario",
          "depletion needs one cumulative case count per stratum");
  DepletionResult out;
  out.state = initial;
  for (std::size_t l = 0; l < initial.num_strata(); ++l) {
    require(spec.cumulative_cases[l] >= 0, "invalid-scenario",
            "cumulative case counts must be nonnegative");
    Count move = static_cast<Count>(
        std::llround(spec.factor * static_cast<double>(spec.cumulative_cases[l])));
    if (move > out.state.susceptible[l]) {
      move = out.state.susceptible[l];
      out.clipped = true;
    }
    out.state.susceptible[l] -= move;
    out.state.removed[l] += move;
  }
  return out;
}

/// Rank trace of deprivation groups by smoothed incidence and the first day
/// (if any) on which the ordering is the exact reverse of the day-0 ordering.
struct SwitchingTrace {
  std::vector<std::vector<int>> order_by_day;  // group indices, highest incidence first
  std::vector<bool> strict;                    // false where ties block a strict order
  std::vector<int> baseline_order;
  std::optional<int> reversal_day;
};

/// Scans a J x H incidence series (one row per deprivation group, typically
/// per-100k) with a trailing moving average of `window` days.  A reversal is
/// reported only when the strict rank order is the exact reverse of the
/// strict day-0 order.
inline SwitchingTrace detect_switching(const Matrix& series, int window) {
  const std::size_t J = series.rows;
  const std::size_t H = series.cols;
  require(J >= 1 && H >= 1, "invalid-argument", "switching detection needs a nonempty series");
  require(window >= 1, "invalid-argument", "moving-average window must be at least 1");
  require(static_cast<std::size_t>(window) <= H, "invalid-argument",
          "moving-average window longer than the series");

  SwitchingTrace trace;
  trace.order_by_day.resize(H);
  trace.strict.resize(H, false);

  std::vector<double> smoothed(J);
  for (std::size_t t = 0; t < H; ++t) {
    const std::size_t lo = (t + 1 >= static_cast<std::size_t>(window))
                               ? t + 1 - static_cast<std::size_t>(window)
                               : 0;
    for (std::size_t j = 0; j < J; ++j) {
      double acc = 0.0;
      for (std::size_t s = lo; s <= t; ++s) acc += series(j, s);
      smoothed[j] = acc / static_cast<double>(t - lo + 1);
    }
    std::vector<int> order(J);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return smoothed[a] > smoothed[b]; });
    bool strict = true;
    for (std::size_t r = 1; r < J; ++r)
      if (smoothed[order[r - 1]] <= smoothed[order[r]]) strict = false;
    trace.order_by_day[t] = order;
    trace.strict[t] = strict && J > 1;
    if (t == 0) trace.baseline_order = order;
  }

  if (trace.strict[0]) {
    std::vector<int> reversed(trace.baseline_order.rbegin(), trace.baseline_order.rend());
    for (std::size_t t = 1; t < H; ++t) {
      if (trace.strict[t] && trace.order_by_day[t] == reversed) {
        trace.reversal_day = static_cast<int>(t);
        break;
      }
    }
  }
  return trace;
}

/// Named scenario presets.  The depletion preset leaves cumulative_cases
/// empty; callers fill it from the case data before simulating.
inline ScenarioSpec scenario_preset(const std::string& name) {
  if (name == "paper-mixing-full" || name == "paper-mixing-assortative") {
    MixingRampSpec spec;
    spec.form = (name == "paper-mixing-full") ? MixingForm::Full : MixingForm::Assortative;
    spec.omega = 0.00085;
    spec.lag_days = 10.0;
    spec.u_diag = (spec.form == MixingForm::Full)
                      ? std::vector<double>{6, 8, 11, 16, 23, 35, 41, 55, 75, 141}
                      : std::vector<double>{65, 85, 115, 150, 190, 250, 270, 300, 330, 370};
    return spec;
  }
  if (name == "paper-mixing-disassortative") {
    MixingRampSpec spec;
    spec.form = MixingForm::Disassortative;
    spec.omega = 0.00085;
    spec.lag_days = 10.0;
    // The final diagonal entry never enters the zero-diagonal form; it is set
    // above the ninth entry only to satisfy the increasing-diagonal check.
    spec.u_diag = {6, 8, 11, 17, 26, 40, 53, 73, 169, 170};
    return spec;
  }
  if (name == "paper-behavioural") {
    BehaviouralRampSpec spec;
    spec.zeta = 1.265;
    spec.epsilon = 0.017;
    return spec;
  }
  if (name == "paper-depletion-5x") {
    DepletionSpec spec;
    spec.factor = 5.0;
    return spec;
  }
  fail("invalid-configuration", "unknown scenario preset '" + name + "'");
}

inline const std::vector<std::string>& scenario_preset_names() {
  static const std::vector<std::string> names = {
      "paper-mixing-full", "paper-mixing-assortative", "paper-mixing-disassortative",
      "paper-behavioural", "paper-depletion-5x"};
  return names;
}

}  // namespace epistrat
