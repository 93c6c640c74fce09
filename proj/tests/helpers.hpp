#pragma once

// Independent oracles and small utilities for the test suite.  Everything
// here is deliberately written from first principles (std::lgamma, double
// loops, explicit enumeration) rather than reusing library internals, so a
// test failure points at the library and not at a shared bug.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epistrat/model.hpp"
#include "epistrat/state.hpp"

namespace testutil {

/// Naive binomial log-pmf via lgamma; -inf outside the support.
double binomial_logpmf(epistrat::Count y, epistrat::Count n, double p);

/// Energy-form CRPS by the O(m^2) double loop over all ordered pairs.
double naive_crps(const std::vector<double>& samples, double observation);

/// One-sample Kolmogorov-Smirnov p-value against Uniform(0,1).
double ks_uniform_pvalue(std::vector<double> samples);

/// Distribution over terminal (S, E, I, R) states of a single-stratum
/// chain-binomial system, by exhaustive enumeration of every event sequence.
/// `drive` holds the log transmission rate per day (already the value that
/// governs that day's transition), `day_effect` the weekday covariate.
std::map<std::array<epistrat::Count, 4>, double> enumerate_terminal(
    std::array<epistrat::Count, 4> initial, double population, double chi, double mixing,
    const std::vector<double>& drive, double gamma1, const std::vector<double>& day_effect,
    const epistrat::FixedConfig& cfg);

/// Fresh empty directory under the system temp root.
std::string fresh_dir(const std::string& tag);

/// Equal-tailed interval [q_lo, q_hi] of a sample.
std::pair<double, double> interval(std::vector<double> samples, double lo, double hi);

/// Runs `fn` and returns the category of the Error it throws, or "" if it
/// does not throw.
template <typename Fn>
std::string error_category(Fn&& fn) {
  try {
    fn();
  } catch (const epistrat::Error& e) {
    return e.category();
  } catch (...) {
    return "<not an epistrat::Error>";
  }
  return "<no throw>";
}

}  // namespace testutil
