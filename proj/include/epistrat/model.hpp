#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "epistrat/common.hpp"
#include "epistrat/strata.hpp"

namespace epistrat {

/// Fixed model constants and prior scales.  Defaults follow the reference
/// configuration: eta = phi = 2, xi = 0.3, nu = 0.28, gamma0 = ln(0.25),
/// daily timestep, prior standard deviations (100, 10, 0.005).
struct FixedConfig {
  double eta = 2.0;
  double phi = 2.0;
  double xi = 0.3;                   // slope sharpness of the deprivation shape
  double nu = 0.28;                  // E -> I rate per day
  double gamma0 = std::log(0.25);    // log baseline I -> R rate
  double delta_t = 1.0;              // timestep in days
  double sigma_gamma1 = 100.0;
  double sigma_alpha0 = 10.0;
  double sigma_alpha = 0.005;        // per-day sd of the random-walk increments

  void validate() const {
    require(eta > 0 && phi > 0 && xi > 0 && nu > 0 && delta_t > 0, "invalid-configuration",
            "eta, phi, xi, nu and delta_t must all be positive");
    require(sigma_gamma1 > 0 && sigma_alpha0 > 0 && sigma_alpha > 0, "invalid-configuration",
            "prior standard deviations must be positive");
  }
};

/// Estimated parameters: per-age intercepts psi and slopes rho (both in (0,1)),
/// the weekday effect gamma1, and the random-walk drive (alpha0 plus one
/// increment per day).
struct ModelParams {
  std::vector<double> psi;
  std::vector<double> rho;
  double gamma1 = 0.0;
  double alpha0 = 0.0;
  std::vector<double> alpha_inc;

  void validate(int num_age) const {
    require(static_cast<int>(psi.size()) == num_age && static_cast<int>(rho.size()) == num_age,
            "invalid-argument", "psi and rho must have one entry per age group");
    for (double v : psi)
      require(v > 0.0 && v < 1.0, "invalid-argument", "psi components must lie in (0,1)");
    for (double v : rho)
      require(v > 0.0 && v < 1.0, "invalid-argument", "rho components must lie in (0,1)");
  }
};

/// Covariates shared by simulation and inference.
struct Covariates {
  std::vector<double> deprivation_index;  // d, length J, 1 = most deprived
  std::vector<double> day_effect;         // w, one entry per day
  std::vector<double> population;         // n, length L
  Matrix age_mixing;                      // K x K
  Matrix deprivation_mixing;              // J x J

  void validate(const StrataLayout& layout) const {
    require(static_cast<int>(deprivation_index.size()) == layout.num_deprivation,
            "invalid-argument", "deprivation index length must equal J");
    require(static_cast<int>(population.size()) == layout.num_strata(), "invalid-argument",
            "population vector length must equal the number of strata");
    for (double n : population)
      require(n > 0.0, "invalid-argument", "every stratum population must be positive");
    require(static_cast<int>(age_mixing.rows) == layout.num_age &&
                static_cast<int>(age_mixing.cols) == layout.num_age,
            "invalid-argument", "age mixing matrix must be K x K");
    require(static_cast<int>(deprivation_mixing.rows) == layout.num_deprivation &&
                static_cast<int>(deprivation_mixing.cols) == layout.num_deprivation,
            "invalid-argument", "deprivation mixing matrix must be J x J");
    for (double v : age_mixing.values)
      require(v >= 0.0, "invalid-argument", "age mixing entries must be nonnegative");
    for (double v : deprivation_mixing.values)
      require(v >= 0.0, "invalid-argument", "deprivation mixing entries must be nonnegative");
  }
};

/// Nested model variants: A has flat adaptation and homogeneous age mixing,
/// B adds the empirical age mixing matrix, C adds the deprivation slope term,
/// D is the full intercept-and-slope model.
enum class ModelVariant { A, B, C, D };

inline ModelVariant parse_variant(const std::string& name) {
  if (name == "A" || name == "a") return ModelVariant::A;
  if (name == "B" || name == "b") return ModelVariant::B;
  if (name == "C" || name == "c") return ModelVariant::C;
  if (name == "D" || name == "d") return ModelVariant::D;
  fail("invalid-configuration", "unknown model variant '" + name + "' (expected A, B, C or D)");
}

inline std::string variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::A: return "A";
    case ModelVariant::B: return "B";
    case ModelVariant::C: return "C";
    case ModelVariant::D: return "D";
  }
  return "?";
}

/// Subtracts the arithmetic mean; the result sums to zero.
inline std::vector<double> center(const std::vector<double>& v) {
  require(!v.empty(), "invalid-argument", "cannot center an empty vector");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(x - mean);
  return out;
}

/// Slope shape across centered deprivation indices: tanh(-xi * d_tilde).
/// Odd-symmetric, bounded in (-1, 1).
inline std::vector<double> deprivation_slope_shape(const std::vector<double>& d_tilde,
                                                   double xi) {
  require(xi > 0.0, "invalid-argument", "slope sharpness xi must be positive");
  std::vector<double> out;
  out.reserve(d_tilde.size());
  for (double d : d_tilde) out.push_back(std::tanh(-xi * d));
  return out;
}

/// Behavioural adaptation vector (length L, age-major) for one model variant.
///
/// Variant D: chi[k*J+j] = phi*(1 + psi_tilde_k) + eta*(1/2 + rho_tilde_k*f_j)
/// with psi_tilde mean-centered, rho_tilde = rho - 1/2 and f the slope shape
/// over centered deprivation indices.  Variant C drops the phi intercept term,
/// variants A and B are identically one.  The sum over all strata is invariant
/// to psi and rho whenever f sums to zero.
inline std::vector<double> behavioural_adaptation(const std::vector<double>& psi,
                                                  const std::vector<double>& rho,
                                                  const std::vector<double>& deprivation_index,
                                                  const FixedConfig& cfg,
                                                  ModelVariant variant = ModelVariant::D) {
  const int num_age = static_cast<int>(psi.size());
  const int num_dep = static_cast<int>(deprivation_index.size());
  require(rho.size() == psi.size(), "invalid-argument", "psi and rho must have equal length");
  require(num_age >= 1 && num_dep >= 1, "invalid-argument", "empty strata layout");
  for (double v : psi)
    require(v > 0.0 && v < 1.0, "invalid-argument", "psi components must lie in (0,1)");
  for (double v : rho)
    require(v > 0.0 && v < 1.0, "invalid-argument", "rho components must lie in (0,1)");

  std::vector<double> chi(static_cast<std::size_t>(num_age) * num_dep, 1.0);
  if (variant == ModelVariant::A || variant == ModelVariant::B) return chi;

  const std::vector<double> psi_tilde = center(psi);
  const std::vector<double> f = deprivation_slope_shape(center(deprivation_index), cfg.xi);
  const bool with_intercept = (variant == ModelVariant::D);
  for (int k = 0; k < num_age; ++k) {
    const double rho_tilde = rho[static_cast<std::size_t>(k)] - 0.5;
    const double intercept =
        with_intercept ? cfg.phi * (1.0 + psi_tilde[static_cast<std::size_t>(k)]) : 0.0;
    for (int j = 0; j < num_dep; ++j) {
      double value = intercept + cfg.eta * (0.5 + rho_tilde * f[static_cast<std::size_t>(j)]);
      require(value > 0.0, "invalid-configuration",
              "behavioural adaptation element is not positive; eta/phi/xi combination "
              "violates the positivity requirement");
      chi[static_cast<std::size_t>(k) * num_dep + j] = value;
    }
  }
  return chi;
}

/// Effective age mixing for a variant: all-ones for A, the supplied matrix
/// otherwise.
inline Matrix effective_age_mixing(ModelVariant variant, const Matrix& age_mixing) {
  if (variant != ModelVariant::A) return age_mixing;
  Matrix ones(age_mixing.rows, age_mixing.cols, 1.0);
  return ones;
}

/// Kronecker product of the age (K x K) and deprivation (J x J) mixing
/// matrices under the age-major flat index:
/// result((k,j),(k',j')) = age(k,k') * dep(j,j').
inline Matrix kron_mixing(const Matrix& age_mixing, const Matrix& deprivation_mixing) {
  require(age_mixing.rows == age_mixing.cols && deprivation_mixing.rows == deprivation_mixing.cols,
          "invalid-argument", "mixing matrices must be square");
  require(age_mixing.rows >= 1 && deprivation_mixing.rows >= 1, "invalid-argument",
          "mixing matrices must be non-empty");
  const std::size_t K = age_mixing.rows;
  const std::size_t J = deprivation_mixing.rows;
  Matrix out(K * J, K * J);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp) {
      const double a = age_mixing(k, kp);
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t jp = 0; jp < J; ++jp)
          out(k * J + j, kp * J + jp) = a * deprivation_mixing(j, jp);
    }
  return out;
}

/// Random-walk transmission drive with one jump per day:
/// a[0] = alpha0 (zero jumps) and a[t] = alpha0 + sum of the first t
/// increments.  Returns T+1 values for T increments; the hazard on day t
/// (step t -> t+1) uses a[t+1], so the final increment drives the final
/// transition.
inline std::vector<double> random_walk_drive(double alpha0,
                                             const std::vector<double>& increments) {
  std::vector<double> a;
  a.reserve(increments.size() + 1);
  a.push_back(alpha0);
  double acc = alpha0;
  for (double inc : increments) {
    acc += inc;
    a.push_back(acc);
  }
  return a;
}

/// Exponential-CDF transition probability: p = 1 - exp(-h * dt).
inline double transition_prob(double hazard, double dt) {
  require(hazard >= 0.0, "invalid-argument", "hazard rate must be nonnegative");
  require(dt > 0.0, "invalid-argument", "timestep must be positive");
  return -std::expm1(-hazard * dt);
}

/// Per-stratum hazard rates at one time point.
struct HazardRates {
  std::vector<double> se;  // infection (force of infection)
  std::vector<double> ei;  // progression, constant nu
  std::vector<double> ir;  // removal, exp(gamma0 + gamma1 * w_t)
};

/// Hazard rates given the current state:
///   h_se = exp(a_t) * chi (.) 1/n (.) [kron . (x_I (.) 1/n)]
///   h_ei = nu
///   h_ir = exp(gamma0 + gamma1 * w_t)
/// `infectious` holds x_I; kron is the L x L contact structure.
inline HazardRates hazards(const std::vector<Count>& infectious, const std::vector<double>& chi,
                           const Matrix& kron, const std::vector<double>& population,
                           double drive_at, double gamma1, double day_effect,
                           const FixedConfig& cfg) {
  const std::size_t L = population.size();
  require(infectious.size() == L && chi.size() == L && kron.rows == L && kron.cols == L,
          "invalid-argument", "hazard inputs disagree on the number of strata");
  for (Count x : infectious)
    require(x >= 0, "invalid-state", "negative infectious count");

  HazardRates h;
  h.se.resize(L);
  h.ei.assign(L, cfg.nu);
  h.ir.assign(L, std::exp(cfg.gamma0 + gamma1 * day_effect));

  // weighted infectious prevalence per stratum
  std::vector<double> prevalence(L);
  for (std::size_t l = 0; l < L; ++l)
    prevalence[l] = static_cast<double>(infectious[l]) / population[l];
  const double scale = std::exp(drive_at);
  for (std::size_t i = 0; i < L; ++i) {
    double pressure = 0.0;
    const double* row = &kron.values[i * L];
    for (std::size_t l = 0; l < L; ++l) pressure += row[l] * prevalence[l];
    h.se[i] = scale * chi[i] / population[i] * pressure;
  }
  return h;
}

}  // namespace epistrat
