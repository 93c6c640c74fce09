#pragma once

#include <cstddef>
#include <vector>

#include "epistrat/common.hpp"

namespace epistrat {

/// Integer compartment counts per stratum at one time point.
struct StateMatrix {
  std::vector<Count> susceptible;
  std::vector<Count> exposed;
  std::vector<Count> infectious;
  std::vector<Count> removed;

  StateMatrix() = default;
  explicit StateMatrix(std::size_t num_strata)
      : susceptible(num_strata, 0),
        exposed(num_strata, 0),
        infectious(num_strata, 0),
        removed(num_strata, 0) {}

  std::size_t num_strata() const { return susceptible.size(); }

  Count total(std::size_t stratum) const {
    return susceptible[stratum] + exposed[stratum] + infectious[stratum] + removed[stratum];
  }

  void validate() const {
    const std::size_t L = susceptible.size();
    require(exposed.size() == L && infectious.size() == L && removed.size() == L,
            "invalid-state", "state compartment vectors disagree on length");
    for (std::size_t l = 0; l < L; ++l)
      require(susceptible[l] >= 0 && exposed[l] >= 0 && infectious[l] >= 0 && removed[l] >= 0,
              "invalid-state", "negative compartment count");
  }

  friend bool operator==(const StateMatrix& a, const StateMatrix& b) {
    return a.susceptible == b.susceptible && a.exposed == b.exposed &&
           a.infectious == b.infectious && a.removed == b.removed;
  }
};

/// Per-stratum, per-day transition counts.  SE and EI are latent in real
/// data; IR is the observable cases channel.  Each grid is L x T.
struct EventSeries {
  CountGrid se;
  CountGrid ei;
  CountGrid ir;

  EventSeries() = default;
  EventSeries(std::size_t num_strata, std::size_t num_days)
      : se(num_strata, num_days), ei(num_strata, num_days), ir(num_strata, num_days) {}

  std::size_t num_strata() const { return se.rows; }
  std::size_t num_days() const { return se.cols; }
};

/// States at t = 0..T plus the events that connect them.
struct Trajectory {
  std::vector<StateMatrix> states;  // T+1 snapshots
  EventSeries events;               // L x T

  std::size_t num_days() const { return events.num_days(); }
};

}  // namespace epistrat
