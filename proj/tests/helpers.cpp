#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "epistrat/model.hpp"

namespace testutil {

double binomial_logpmf(epistrat::Count y, epistrat::Count n, double p) {
  if (y < 0 || y > n || n < 0) return -std::numeric_limits<double>::infinity();
  if (p <= 0.0) return y == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return y == n ? 0.0 : -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double yd = static_cast<double>(y);
  return std::lgamma(nd + 1.0) - std::lgamma(yd + 1.0) - std::lgamma(nd - yd + 1.0) +
         yd * std::log(p) + (nd - yd) * std::log1p(-p);
}

double naive_crps(const std::vector<double>& samples, double observation) {
  const double m = static_cast<double>(samples.size());
  double term_obs = 0.0;
  for (double x : samples) term_obs += std::abs(x - observation);
  double term_pair = 0.0;
  for (double a : samples)
    for (double b : samples) term_pair += std::abs(a - b);
  return term_obs / m - 0.5 * term_pair / (m * m);
}

double ks_uniform_pvalue(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = samples[i];  // U(0,1)
    const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
    const double lo = cdf - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  // Asymptotic Kolmogorov tail with the standard small-sample correction.
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * p, 0.0, 1.0);
}

std::map<std::array<epistrat::Count, 4>, double> enumerate_terminal(
    std::array<epistrat::Count, 4> initial, double population, double chi, double mixing,
    const std::vector<double>& drive, double gamma1, const std::vector<double>& day_effect,
    const epistrat::FixedConfig& cfg) {
  using State = std::array<epistrat::Count, 4>;
  std::map<State, double> dist;
  dist[initial] = 1.0;
  const std::size_t num_days = day_effect.size();
  for (std::size_t t = 0; t < num_days; ++t) {
    std::map<State, double> next;
    for (const auto& [state, prob] : dist) {
      const auto [s, e, i, r] = state;
      const double h_se = std::exp(drive[t]) * chi / population * mixing *
                          static_cast<double>(i) / population;
      const double h_ir = std::exp(cfg.gamma0 + gamma1 * day_effect[t]);
      const double p_se = 1.0 - std::exp(-h_se * cfg.delta_t);
      const double p_ei = 1.0 - std::exp(-cfg.nu * cfg.delta_t);
      const double p_ir = 1.0 - std::exp(-h_ir * cfg.delta_t);
      for (epistrat::Count y_se = 0; y_se <= s; ++y_se) {
        const double lp_se = binomial_logpmf(y_se, s, p_se);
        for (epistrat::Count y_ei = 0; y_ei <= e; ++y_ei) {
          const double lp_ei = binomial_logpmf(y_ei, e, p_ei);
          for (epistrat::Count y_ir = 0; y_ir <= i; ++y_ir) {
            const double lp_ir = binomial_logpmf(y_ir, i, p_ir);
            const State to{s - y_se, e + y_se - y_ei, i + y_ei - y_ir, r + y_ir};
            next[to] += prob * std::exp(lp_se + lp_ei + lp_ir);
          }
        }
      }
    }
    dist = std::move(next);
  }
  return dist;
}

std::string fresh_dir(const std::string& tag) {
  static int counter = 0;
  const auto base = std::filesystem::temp_directory_path() / "epistrat_tests";
  const auto dir = base / (tag + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::pair<double, double> interval(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const auto pick = [&](double p) {
    const double pos = p * static_cast<double>(samples.size() - 1);
    const auto idx = static_cast<std::size_t>(pos);
    if (idx + 1 >= samples.size()) return samples.back();
    const double frac = pos - static_cast<double>(idx);
    return samples[idx] + frac * (samples[idx + 1] - samples[idx]);
  };
  return {pick(lo), pick(hi)};
}

}  // namespace testutil
