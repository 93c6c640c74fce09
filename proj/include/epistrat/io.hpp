#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epistrat/common.hpp"
#include "epistrat/config.hpp"
#include "epistrat/dates.hpp"
#include "epistrat/infer.hpp"
#include "epistrat/metrics.hpp"
#include "epistrat/model.hpp"
#include "epistrat/rng.hpp"
#include "epistrat/scenario.hpp"
#include "epistrat/simulate.hpp"
#include "epistrat/state.hpp"
#include "epistrat/strata.hpp"

namespace epistrat {

/// Dense daily case counts per stratum with the label/date bookkeeping
/// needed to map between file rows and the flat stratum order.
struct CaseDataset {
  StrataLayout layout{1, 1};
  std::vector<std::string> age_labels;
  Date start{};
  CountGrid counts;               ///< strata x days
  std::size_t missing_cells = 0;  ///< cells densified to zero on load

  int num_days() const { return static_cast<int>(counts.cols); }
  Date date_at(int t) const { return add_days(start, t); }

  std::vector<double> weekday_covariate_series() const {
    return weekday_covariate(date_range(start, num_days()));
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

inline long parse_long_field(const std::string& text, std::size_t row, const char* what) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size(), "input",
          "row " + std::to_string(row) + ": cannot parse " + what + " '" + text + "'");
  return value;
}

inline double parse_double_field(const std::string& text, std::size_t row, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size(), "input",
          "row " + std::to_string(row) + ": cannot parse " + what + " '" + text + "'");
  return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io", "cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "io", "cannot write '" + path + "'");
  return out;
}

inline void check_header(const std::vector<std::string>& fields, const char* expected,
                         const std::string& path) {
  std::string joined;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) joined += ',';
    joined += fields[i];
  }
  require(joined == expected, "input",
          "'" + path + "': expected header '" + expected + "', found '" + joined + "'");
}

inline int age_index(const std::vector<std::string>& labels, const std::string& label,
                     std::size_t row) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  require(it != labels.end(), "input",
          "row " + std::to_string(row) + ": unknown age group label '" + label + "'");
  return static_cast<int>(it - labels.begin());
}

inline int decile_index(long value, int num_deprivation, std::size_t row) {
  require(value >= 1 && value <= num_deprivation, "input",
          "row " + std::to_string(row) + ": imd_decile " + std::to_string(value) +
              " outside 1-" + std::to_string(num_deprivation));
  return static_cast<int>(value - 1);
}

}  // namespace detail

/// Loads the case CSV (`date,age_group,imd_decile,count`), densifying missing
/// (stratum, day) cells to zero.  Dates must form one contiguous range.
inline CaseDataset load_cases(const std::string& path, const LayoutConfig& layout_cfg) {
  layout_cfg.validate();
  const std::vector<std::string> lines = detail::read_lines(path);
  require(!lines.empty(), "input", "'" + path + "': empty file");
  detail::check_header(detail::split_csv_line(lines[0]), "date,age_group,imd_decile,count", path);

  struct Row {
    Date date;
    int stratum;
    Count count;
  };
  const StrataLayout layout = layout_cfg.layout();
  std::vector<Row> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty() || lines[r] == "\r") continue;
    const std::vector<std::string> f = detail::split_csv_line(lines[r]);
    require(f.size() == 4, "input",
            "row " + std::to_string(r) + ": expected 4 fields, found " +
                std::to_string(f.size()));
    Row row;
    try {
      row.date = parse_date(f[0]);
    } catch (const Error& e) {
      fail("input", "row " + std::to_string(r) + ": " + e.what());
    }
    const int k = detail::age_index(layout_cfg.age_labels, f[1], r);
    const int j = detail::decile_index(detail::parse_long_field(f[2], r, "imd_decile"),
                                       layout.num_deprivation, r);
    row.stratum = layout.flat(k, j);
    row.count = detail::parse_long_field(f[3], r, "count");
    require(row.count >= 0, "input", "row " + std::to_string(r) + ": negative case count");
    rows.push_back(row);
  }
  require(!rows.empty(), "input", "'" + path + "': no data rows after the header");

  Date start = rows[0].date;
  Date last = rows[0].date;
  for (const Row& row : rows) {
    if (days_between(start, row.date) < 0) start = row.date;
    if (days_between(last, row.date) > 0) last = row.date;
  }
  const int num_days = days_between(start, last) + 1;
  std::set<int> seen_days;
  for (const Row& row : rows) seen_days.insert(days_between(start, row.date));
  for (int t = 0; t < num_days; ++t)
    require(seen_days.count(t) > 0, "input",
            "no rows for date " + format_date(add_days(start, t)) +
                " inside the data range; dates must be contiguous");

  CaseDataset data;
  data.layout = layout;
  data.age_labels = layout_cfg.age_labels;
  data.start = start;
  data.counts = CountGrid(static_cast<std::size_t>(layout.num_strata()),
                          static_cast<std::size_t>(num_days), 0);
  CountGrid filled(data.counts.rows, data.counts.cols, 0);
  for (const Row& row : rows) {
    const auto t = static_cast<std::size_t>(days_between(start, row.date));
    data.counts(static_cast<std::size_t>(row.stratum), t) += row.count;
    filled(static_cast<std::size_t>(row.stratum), t) = 1;
  }
  for (Count cell : filled.values)
    if (cell == 0) ++data.missing_cells;
  return data;
}

/// Writes every (date, stratum) cell, including zeros, so a reload
/// reproduces the dataset exactly.
inline void write_cases(const std::string& path, const CaseDataset& data) {
  std::ofstream out = detail::open_output(path);
  out << "date,age_group,imd_decile,count\n";
  for (int t = 0; t < data.num_days(); ++t) {
    const std::string date = format_date(data.date_at(t));
    for (int k = 0; k < data.layout.num_age; ++k)
      for (int j = 0; j < data.layout.num_deprivation; ++j)
        out << date << ',' << data.age_labels[static_cast<std::size_t>(k)] << ',' << (j + 1)
            << ',' << data.counts(static_cast<std::size_t>(data.layout.flat(k, j)),
                                  static_cast<std::size_t>(t))
            << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

/// Loads per-stratum populations (`age_group,imd_decile,population`); every
/// stratum must appear exactly once with a positive value.
inline std::vector<double> load_population(const std::string& path,
                                           const LayoutConfig& layout_cfg) {
  layout_cfg.validate();
  const StrataLayout layout = layout_cfg.layout();
  const std::vector<std::string> lines = detail::read_lines(path);
  require(!lines.empty(), "input", "'" + path + "': empty file");
  detail::check_header(detail::split_csv_line(lines[0]), "age_group,imd_decile,population", path);

  std::vector<double> population(static_cast<std::size_t>(layout.num_strata()), 0.0);
  std::vector<bool> seen(population.size(), false);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty() || lines[r] == "\r") continue;
    const std::vector<std::string> f = detail::split_csv_line(lines[r]);
    require(f.size() == 3, "input",
            "row " + std::to_string(r) + ": expected 3 fields, found " +
                std::to_string(f.size()));
    const int k = detail::age_index(layout_cfg.age_labels, f[0], r);
    const int j = detail::decile_index(detail::parse_long_field(f[1], r, "imd_decile"),
                                       layout.num_deprivation, r);
    const auto l = static_cast<std::size_t>(layout.flat(k, j));
    require(!seen[l], "input", "row " + std::to_string(r) + ": duplicate stratum");
    const double value = detail::parse_double_field(f[2], r, "population");
    require(value > 0.0, "input",
            "row " + std::to_string(r) + ": population must be positive");
    population[l] = value;
    seen[l] = true;
  }
  for (std::size_t l = 0; l < seen.size(); ++l)
    require(seen[l], "input", "'" + path + "': missing a row for stratum " + std::to_string(l));
  return population;
}

inline void write_population(const std::string& path, const LayoutConfig& layout_cfg,
                             const std::vector<double>& population) {
  const StrataLayout layout = layout_cfg.layout();
  require(population.size() == static_cast<std::size_t>(layout.num_strata()),
          "invalid-argument", "population vector does not match the layout");
  std::ofstream out = detail::open_output(path);
  out << "age_group,imd_decile,population\n";
  for (int k = 0; k < layout.num_age; ++k)
    for (int j = 0; j < layout.num_deprivation; ++j)
      out << layout_cfg.age_labels[static_cast<std::size_t>(k)] << ',' << (j + 1) << ','
          << population[static_cast<std::size_t>(layout.flat(k, j))] << '\n';
  require(out.good(), "io", "failed writing '" + path + "'");
}

/// Loads the K x K age contact matrix; row and column labels must match the
/// configured age groups in order.
inline Matrix load_contact_matrix(const std::string& path, const LayoutConfig& layout_cfg) {
  layout_cfg.validate();
  const std::vector<std::string> lines = detail::read_lines(path);
  const auto K = static_cast<std::size_t>(layout_cfg.num_age);
  require(lines.size() >= K + 1, "input",
          "'" + path + "': expected " + std::to_string(K + 1) + " lines");
  const std::vector<std::string> header = detail::split_csv_line(lines[0]);
  require(header.size() == K + 1, "input",
          "'" + path + "': header must have one label per age group");
  for (std::size_t k = 0; k < K; ++k)
    require(header[k + 1] == layout_cfg.age_labels[k], "input",
            "'" + path + "': header label '" + header[k + 1] +
                "' does not match age group '" + layout_cfg.age_labels[k] + "'");
  Matrix contact(K, K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t r = k + 1;
    const std::vector<std::string> f = detail::split_csv_line(lines[r]);
    require(f.size() == K + 1, "input",
            "row " + std::to_string(r) + ": expected " + std::to_string(K + 1) + " fields");
    require(f[0] == layout_cfg.age_labels[k], "input",
            "row " + std::to_string(r) + ": row label '" + f[0] +
                "' does not match age group '" + layout_cfg.age_labels[k] + "'");
    for (std::size_t c = 0; c < K; ++c) {
      contact(k, c) = detail::parse_double_field(f[c + 1], r, "contact rate");
      require(contact(k, c) >= 0.0, "input",
              "row " + std::to_string(r) + ": contact rates must be nonnegative");
    }
  }
  return contact;
}

inline void write_contact_matrix(const std::string& path, const LayoutConfig& layout_cfg,
                                 const Matrix& contact) {
  const auto K = static_cast<std::size_t>(layout_cfg.num_age);
  require(contact.rows == K && contact.cols == K, "invalid-argument",
          "contact matrix does not match the layout");
  std::ofstream out = detail::open_output(path);
  out << "age_group";
  for (const std::string& label : layout_cfg.age_labels) out << ',' << label;
  out << '\n';
  for (std::size_t k = 0; k < K; ++k) {
    out << layout_cfg.age_labels[k];
    for (std::size_t c = 0; c < K; ++c) out << ',' << contact(k, c);
    out << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

// --- initial state construction -------------------------------------------

/// Builds the fixed initial state from the configured mode.  `cases` is only
/// needed for from-cases mode, which sizes the exposed and infectious pools
/// from early-window incidence scaled by the ascertainment multiplier.
inline StateMatrix build_initial_state(const InitialStateConfig& init,
                                       const std::vector<double>& population,
                                       const FixedConfig& model, const CountGrid* cases) {
  init.validate();
  const std::size_t L = population.size();
  StateMatrix state;
  state.susceptible.assign(L, 0);
  state.exposed.assign(L, 0);
  state.infectious.assign(L, 0);
  state.removed.assign(L, 0);

  if (init.mode == "explicit") {
    require(init.susceptible.size() == L && init.exposed.size() == L &&
                init.infectious.size() == L && init.removed.size() == L,
            "invalid-configuration",
            "explicit initial state arrays must have one entry per stratum");
    state.susceptible = init.susceptible;
    state.exposed = init.exposed;
    state.infectious = init.infectious;
    state.removed = init.removed;
    state.validate();
    return state;
  }

  if (init.mode == "seed-fraction") {
    for (std::size_t l = 0; l < L; ++l) {
      const Count seed = std::max<Count>(1, std::llround(init.seed_fraction * population[l]));
      state.infectious[l] = seed;
      state.exposed[l] = seed;
      state.susceptible[l] = std::max<Count>(0, std::llround(population[l]) - 2 * seed);
    }
    state.validate();
    return state;
  }

  require(cases != nullptr, "invalid-configuration",
          "from-cases initial state needs a case dataset");
  require(cases->rows == L, "invalid-argument",
          "case grid and population disagree on the number of strata");
  const auto window = std::min<std::size_t>(static_cast<std::size_t>(init.window_days),
                                            cases->cols);
  const double p_removal = transition_prob(std::exp(model.gamma0), model.delta_t);
  const double p_onset = transition_prob(model.nu, model.delta_t);
  for (std::size_t l = 0; l < L; ++l) {
    double mean_cases = 0.0;
    for (std::size_t t = 0; t < window; ++t)
      mean_cases += static_cast<double>((*cases)(l, t));
    mean_cases /= static_cast<double>(window);
    const double incidence = init.ascertainment * mean_cases;
    state.infectious[l] = std::llround(incidence / p_removal);
    state.exposed[l] = std::llround(incidence / p_onset);
    state.susceptible[l] = std::max<Count>(
        0, std::llround(population[l]) - state.exposed[l] - state.infectious[l]);
  }
  state.validate();
  return state;
}

// --- synthetic data -------------------------------------------------------

/// Drive level that produces roughly `target_rate` new infections per
/// infectious individual per day at the start of an epidemic, given the
/// mixing structure.  Used to pick sensible default generating parameters.
inline double calibrate_alpha0(const std::vector<double>& chi, const Matrix& kron,
                               const std::vector<double>& population, double target_rate) {
  require(target_rate > 0.0, "invalid-argument", "target rate must be positive");
  const std::size_t L = population.size();
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    double row = 0.0;
    for (std::size_t l = 0; l < L; ++l) row += kron(i, l);
    weighted += chi[i] * row;
    total += population[i];
  }
  require(weighted > 0.0, "invalid-argument", "mixing structure has no transmission routes");
  return std::log(target_rate * total / weighted);
}

struct SyntheticResult {
  CaseDataset cases;
  ModelParams params;
  StateMatrix initial;
  Covariates cov;
  Trajectory trajectory;
  bool degenerate_seed = false;  ///< no infectious seed anywhere: all-zero data
};

/// Generates a synthetic dataset by forward simulation.  Parameters come
/// from the config when given, otherwise from the priors (draw_from_prior)
/// or from built-in heterogeneous defaults calibrated to the layout.
inline SyntheticResult generate_synthetic(const RunConfig& cfg) {
  cfg.validate();
  const StrataLayout layout = cfg.layout.layout();
  const auto L = static_cast<std::size_t>(layout.num_strata());
  const auto K = static_cast<std::size_t>(layout.num_age);
  const int T = cfg.synth.num_days;

  SyntheticResult out;
  out.cov.deprivation_index = cfg.effective_deprivation_index();
  out.cov.population.assign(L, cfg.synth.population_per_stratum);
  out.cov.age_mixing = Matrix(K, K, 1.0);
  out.cov.deprivation_mixing =
      Matrix(static_cast<std::size_t>(layout.num_deprivation),
             static_cast<std::size_t>(layout.num_deprivation), 1.0);
  // Existing population/contact files refine the defaults; in a fresh synth
  // run those paths are outputs and do not exist yet.
  if (!cfg.paths.population.empty() && std::filesystem::exists(cfg.paths.population))
    out.cov.population = load_population(cfg.paths.population, cfg.layout);
  if (!cfg.paths.contact.empty() && std::filesystem::exists(cfg.paths.contact))
    out.cov.age_mixing = load_contact_matrix(cfg.paths.contact, cfg.layout);
  out.cov.day_effect = weekday_covariate(date_range(parse_date(cfg.start_date), T));

  RngStream rng = RngStream::from(cfg.seed, {0x73796e74ULL});  // synth parameter stream
  if (cfg.synth.params) {
    out.params = *cfg.synth.params;
    if (out.params.alpha_inc.empty() && cfg.synth.alpha_random_walk) {
      out.params.alpha_inc.resize(static_cast<std::size_t>(T));
      for (double& inc : out.params.alpha_inc)
        inc = normal_draw(rng, 0.0, cfg.model.sigma_alpha);
    }
  } else if (cfg.synth.draw_from_prior) {
    out.params.psi.resize(K);
    out.params.rho.resize(K);
    for (double& p : out.params.psi) p = uniform01(rng);
    for (double& p : out.params.rho) p = uniform01(rng);
    out.params.gamma1 = normal_draw(rng, 0.0, cfg.model.sigma_gamma1);
    out.params.alpha0 = normal_draw(rng, 0.0, cfg.model.sigma_alpha0);
    out.params.alpha_inc.resize(static_cast<std::size_t>(T));
    for (double& inc : out.params.alpha_inc)
      inc = normal_draw(rng, 0.0, cfg.model.sigma_alpha);
  } else {
    // Heterogeneous defaults: psi and rho spread across (0,1), mild weekday
    // effect, drive calibrated for slow early growth.
    out.params.psi.resize(K);
    out.params.rho.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      out.params.psi[k] = 0.3 + 0.4 * (K == 1 ? 0.5 : static_cast<double>(k) / (K - 1));
      out.params.rho[k] = 0.2 + 0.6 * (K == 1 ? 0.5 : static_cast<double>(k) / (K - 1));
    }
    out.params.gamma1 = 0.1;
    const std::vector<double> chi = behavioural_adaptation(
        out.params.psi, out.params.rho, out.cov.deprivation_index, cfg.model, cfg.variant);
    const Matrix kron = kron_mixing(effective_age_mixing(cfg.variant, out.cov.age_mixing),
                                    out.cov.deprivation_mixing);
    out.params.alpha0 = calibrate_alpha0(chi, kron, out.cov.population, 0.35);
    if (cfg.synth.alpha_random_walk) {
      out.params.alpha_inc.resize(static_cast<std::size_t>(T));
      for (double& inc : out.params.alpha_inc)
        inc = normal_draw(rng, 0.0, cfg.model.sigma_alpha);
    }
  }
  out.params.validate(static_cast<int>(K));

  InitialStateConfig init = cfg.initial_state;
  if (init.mode == "from-cases") init.mode = "seed-fraction";  // no cases exist yet
  out.initial = build_initial_state(init, out.cov.population, cfg.model, nullptr);

  bool any_infectious = false;
  for (Count i : out.initial.infectious) any_infectious = any_infectious || i > 0;
  for (Count e : out.initial.exposed) any_infectious = any_infectious || e > 0;
  out.degenerate_seed = !any_infectious;

  SimulationResult sim = simulate(out.initial, out.params, out.cov, cfg.model, T, cfg.variant,
                                  std::nullopt, cfg.seed, 0);
  out.trajectory = std::move(sim.trajectory);

  out.cases.layout = layout;
  out.cases.age_labels = cfg.layout.age_labels;
  out.cases.start = parse_date(cfg.start_date);
  out.cases.counts = out.trajectory.events.ir;
  return out;
}

// --- posterior serialization ----------------------------------------------

/// JSON-lines posterior: one sample per line with parameters and terminal
/// state; the machine round-trip format consumed by forecast/rt/crps.
inline void write_posterior_jsonl(const std::string& path,
                                  const std::vector<PosteriorSample>& samples) {
  std::ofstream out = detail::open_output(path);
  for (const PosteriorSample& s : samples) {
    nlohmann::json j{{"iteration", s.iteration},
                     {"log_posterior", s.log_posterior},
                     {"params", params_to_json(s.params)},
                     {"terminal_state", state_to_json(s.terminal_state)}};
    out << j.dump() << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

inline std::vector<PosteriorSample> load_posterior_jsonl(const std::string& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  std::vector<PosteriorSample> samples;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[r]);
    } catch (const nlohmann::json::exception& e) {
      fail("input", "line " + std::to_string(r + 1) + " of '" + path +
                        "' is not valid JSON: " + e.what());
    }
    detail::JsonObject obj(j, "posterior line " + std::to_string(r + 1));
    PosteriorSample s;
    s.iteration = obj.get<int>("iteration", 0);
    s.log_posterior = obj.get<double>("log_posterior", 0.0);
    s.params = params_from_json(obj.raw("params"), "params");
    s.terminal_state = state_from_json(obj.raw("terminal_state"), "terminal_state");
    obj.done();
    samples.push_back(std::move(s));
  }
  require(!samples.empty(), "input", "'" + path + "': no posterior samples");
  return samples;
}

/// Flat CSV view of the posterior scalars (drive path summarized by its end
/// value; the full path lives in the JSON-lines file).
inline void write_posterior_csv(const std::string& path,
                                const std::vector<PosteriorSample>& samples) {
  require(!samples.empty(), "invalid-argument", "no posterior samples to write");
  std::ofstream out = detail::open_output(path);
  const std::size_t K = samples[0].params.psi.size();
  out << "iteration,log_posterior,gamma1,alpha0,drive_end";
  for (std::size_t k = 0; k < K; ++k) out << ",psi_" << k;
  for (std::size_t k = 0; k < K; ++k) out << ",rho_" << k;
  out << '\n';
  for (const PosteriorSample& s : samples) {
    const std::vector<double> drive = random_walk_drive(s.params.alpha0, s.params.alpha_inc);
    out << s.iteration << ',' << s.log_posterior << ',' << s.params.gamma1 << ','
        << s.params.alpha0 << ',' << drive.back();
    for (double v : s.params.psi) out << ',' << v;
    for (double v : s.params.rho) out << ',' << v;
    out << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

// --- analysis outputs -----------------------------------------------------

/// Forecast summary per stratum per day: ensemble mean with the 90% band.
inline void write_forecast_csv(const std::string& path, const std::vector<CountGrid>& ensemble,
                               Date first_day) {
  require(!ensemble.empty(), "invalid-argument", "empty forecast ensemble");
  std::ofstream out = detail::open_output(path);
  out << "stratum,date,mean,q05,q95\n";
  const std::size_t L = ensemble[0].rows;
  const std::size_t H = ensemble[0].cols;
  std::vector<double> cell(ensemble.size());
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t t = 0; t < H; ++t) {
      for (std::size_t m = 0; m < ensemble.size(); ++m)
        cell[m] = static_cast<double>(ensemble[m](l, t));
      out << l << ',' << format_date(add_days(first_day, static_cast<int>(t))) << ','
          << mean(cell) << ',' << quantile(cell, 0.05) << ',' << quantile(cell, 0.95) << '\n';
    }
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

inline void write_crps_csv(const std::string& path, const CrpsTable& table,
                           const StrataLayout& layout,
                           const std::vector<std::string>& age_labels, Date first_day) {
  std::ofstream out = detail::open_output(path);
  out << "stratum,age,imd,date,crps\n";
  for (std::size_t l = 0; l < table.scores.rows; ++l) {
    const auto idx = layout.unflat(static_cast<int>(l));
    for (std::size_t t = 0; t < table.scores.cols; ++t)
      out << l << ',' << age_labels[static_cast<std::size_t>(idx.age_k)] << ','
          << (idx.dep_j + 1) << ',' << format_date(add_days(first_day, static_cast<int>(t)))
          << ',' << table.scores(l, t) << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

inline void write_rt_csv(const std::string& path, const RtEstimate& rt,
                         const StrataLayout& layout,
                         const std::vector<std::string>& age_labels) {
  std::ofstream out = detail::open_output(path);
  out << "stratum,age,imd,mean,q05,q95,exceedance\n";
  const std::size_t L = rt.values.cols;
  std::vector<double> column(rt.values.rows);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t m = 0; m < rt.values.rows; ++m) column[m] = rt.values(m, l);
    const auto idx = layout.unflat(static_cast<int>(l));
    out << l << ',' << age_labels[static_cast<std::size_t>(idx.age_k)] << ',' << (idx.dep_j + 1)
        << ',' << mean(column) << ',' << quantile(column, 0.05) << ','
        << quantile(column, 0.95) << ',' << rt.exceedance[l] << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

/// Daily decile ordering from detect_switching: deciles listed most-affected
/// first, with a strictness flag per day.
inline void write_switching_csv(const std::string& path, const SwitchingTrace& trace) {
  std::ofstream out = detail::open_output(path);
  out << "day";
  const std::size_t J = trace.order_by_day.empty() ? 0 : trace.order_by_day[0].size();
  for (std::size_t r = 0; r < J; ++r) out << ",rank" << (r + 1);
  out << ",strict\n";
  for (std::size_t day = 0; day < trace.order_by_day.size(); ++day) {
    out << day;
    for (int decile : trace.order_by_day[day]) out << ',' << (decile + 1);
    out << ',' << (trace.strict[day] ? 1 : 0) << '\n';
  }
  require(out.good(), "io", "failed writing '" + path + "'");
}

}  // namespace epistrat
