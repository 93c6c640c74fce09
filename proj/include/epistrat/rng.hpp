#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

#include "epistrat/common.hpp"

namespace epistrat {

namespace detail {
// splitmix64 finalizer (Vigna); also used to fold stream keys.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-derived random stream (splitmix64).  Streams are keyed by a seed
/// plus an explicit path of integers, so draws for a given
/// (member, day, stratum, transition) are independent of evaluation order
/// and of thread scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t state) : state_(state) {}

  static RngStream from(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = detail::mix64(seed);
    for (std::uint64_t p : path) s = detail::mix64(s ^ detail::mix64(p));
    return RngStream(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(state_);
  }

 private:
  std::uint64_t state_;
};

inline double uniform01(RngStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double normal_draw(RngStream& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

inline Count binomial_draw(RngStream& rng, Count n, double p) {
  require(n >= 0, "invalid-argument", "binomial count must be nonnegative");
  require(p >= 0.0 && p <= 1.0, "invalid-argument", "binomial probability outside [0,1]");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<Count> dist(n, p);
  return dist(rng);
}

}  // namespace epistrat
