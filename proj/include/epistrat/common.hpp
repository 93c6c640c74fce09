#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epistrat {

using Count = std::int64_t;

/// Error with a short machine-parseable category ("input", "io",
/// "invalid-argument", "invalid-state", "invalid-configuration",
/// "invalid-scenario", "infeasible").
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

[[noreturn]] inline void fail(const std::string& category, const std::string& message) {
  throw Error(category, message);
}

inline void require(bool cond, const std::string& category, const std::string& message) {
  if (!cond) fail(category, message);
}

/// Dense row-major matrix, just enough for mixing matrices and event series.
template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), values(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  bool same_shape(const Grid& other) const { return rows == other.rows && cols == other.cols; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows == b.rows && a.cols == b.cols && a.values == b.values;
  }
};

using Matrix = Grid<double>;
using CountGrid = Grid<Count>;

}  // namespace epistrat
