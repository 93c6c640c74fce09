#pragma once

#include <utility>

#include "epistrat/common.hpp"

namespace epistrat {

/// Maps (age group, deprivation decile) to a flat stratum index.
///
/// The flat order is age-major, deprivation-minor: stratum i = k*J + j for
/// age group k in [0,K) and deprivation group j in [0,J).  This matches the
/// Kronecker factor order age_mixing (x) deprivation_mixing, so block (k,k')
/// of the full contact matrix carries the deprivation submatrix.
struct StrataLayout {
  int num_deprivation = 0;  // J
  int num_age = 0;          // K

  StrataLayout() = default;
  StrataLayout(int num_deprivation_j, int num_age_k)
      : num_deprivation(num_deprivation_j), num_age(num_age_k) {
    require(num_deprivation >= 1 && num_age >= 1, "invalid-argument",
            "strata layout needs at least one deprivation and one age group");
  }

  int num_strata() const { return num_deprivation * num_age; }

  int flat(int age_k, int dep_j) const {
    require(age_k >= 0 && age_k < num_age && dep_j >= 0 && dep_j < num_deprivation,
            "invalid-argument", "stratum index out of range");
    return age_k * num_deprivation + dep_j;
  }

  struct Indices {
    int age_k;
    int dep_j;
  };

  /// Inverse of flat().
  Indices unflat(int stratum) const {
    require(stratum >= 0 && stratum < num_strata(), "invalid-argument",
            "stratum index out of range");
    return {stratum / num_deprivation, stratum % num_deprivation};
  }
};

}  // namespace epistrat
