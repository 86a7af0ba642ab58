#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "medheur/bahadur.hpp"
#include "medheur/mmd.hpp"
#include "medheur/montecarlo.hpp"
#include "medheur/target_distribution.hpp"
#include "medheur/version.hpp"

namespace medheur {

// Invalid run configuration; the CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class OutputFormat { Csv, Json };

// Fully resolved parameters of one CLI invocation. Every output file
// embeds a serialized copy so results can be reproduced byte for byte.
struct RunConfig {
  std::string command;
  std::string scenario_kind = "mean";  // "mean" | "var"
  double mu = 1.0;
  double sigma = 1.0;
  double alpha = 0.5;
  int dim = 1;
  int n = 400;
  int replicates = 0;  // 0 = command default
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::vector<double> grid_mu;        // defaults filled by validate()
  std::vector<double> grid_sigma_sq;
  std::vector<double> grid_nu;
  std::vector<double> grid_t;
  std::vector<double> curve_params;   // parameter set for figure4/figure5
  double lambda = 5000.0;             // gap-check
  int bins = 60;                      // figure1 histogram bins
  int lambda1_points = 1000;          // figure3
  int lambda1_reps = 5;               // figure3
  bool sqrt_h_convention = false;     // bandwidth command
  std::string out = "out";
  OutputFormat format = OutputFormat::Csv;
  bool dry_run = false;
  unsigned num_threads = 0;

  Scenario scenario() const {
    if (scenario_kind == "mean") {
      return Scenario::mean_shift(mu, alpha, dim);
    }
    if (scenario_kind == "var") {
      return Scenario::variance_scale(sigma, alpha, dim);
    }
    throw ConfigError("scenario must be 'mean' or 'var'");
  }

  void validate() {
    if (!has_seed) throw ConfigError("seed is mandatory (no wall-clock default)");
    if (scenario_kind != "mean" && scenario_kind != "var") {
      throw ConfigError("scenario must be 'mean' or 'var'");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (n < 2) throw ConfigError("n must be >= 2");
    if (bins < 2) throw ConfigError("bins must be >= 2");
    if (lambda1_points < 10) throw ConfigError("lambda1-points must be >= 10");
    if (lambda1_reps < 2) throw ConfigError("lambda1-reps must be >= 2");
    // Grid defaults are resolved per command so that the config embedded in
    // each output file lists exactly the values the run used.
    const bool sweeps_params = command == "figure2" || command == "figure3";
    const bool curve_figures = command == "figure4" || command == "figure5";
    if (sweeps_params) {
      if (grid_mu.empty()) {
        for (double v = 0.25; v <= 10.0 + 1e-12; v += 0.25) {
          grid_mu.push_back(v);
        }
      }
      if (grid_sigma_sq.empty()) {
        for (double v = 1.25; v <= 16.0 + 1e-12; v += 0.25) {
          grid_sigma_sq.push_back(v);
        }
      }
    }
    if (curve_figures) {
      if (grid_nu.empty()) {
        for (int k = 0; k < 200; ++k) {
          grid_nu.push_back(std::exp(
              std::log(1e-2) + k * (std::log(1e2) - std::log(1e-2)) / 199.0));
        }
      }
      if (grid_t.empty()) {
        for (int k = 0; k < 500; ++k) grid_t.push_back(0.05 + k * 0.5);
      }
      if (curve_params.empty()) {
        curve_params = command == "figure4"
                           ? std::vector<double>{1.0, 2.0, 5.0, 10.0}
                           : std::vector<double>{2.0, 4.0, 9.0, 16.0};
      }
    }
    check_increasing(grid_mu, "grid-mu");
    check_increasing(grid_sigma_sq, "grid-sigma-sq");
    check_increasing(grid_nu, "grid-nu");
    check_increasing(grid_t, "grid-t");
    check_increasing(curve_params, "curve-params");
  }

 private:
  static void check_increasing(const std::vector<double>& g, const char* name) {
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (!(g[i] > g[i - 1])) {
        throw ConfigError(std::string(name) + " must be strictly increasing");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"command", c.command},
                        {"scenario", c.scenario_kind},
                        {"mu", c.mu},
                        {"sigma", c.sigma},
                        {"alpha", c.alpha},
                        {"dim", c.dim},
                        {"n", c.n},
                        {"replicates", c.replicates},
                        {"seed", c.seed},
                        {"grid_mu", c.grid_mu},
                        {"grid_sigma_sq", c.grid_sigma_sq},
                        {"grid_nu", c.grid_nu},
                        {"grid_t", c.grid_t},
                        {"curve_params", c.curve_params},
                        {"lambda", c.lambda},
                        {"bins", c.bins},
                        {"lambda1_points", c.lambda1_points},
                        {"lambda1_reps", c.lambda1_reps},
                        {"sqrt_h_convention", c.sqrt_h_convention},
                        {"out", c.out},
                        {"format", c.format == OutputFormat::Csv ? "csv" : "json"},
                        {"num_threads", c.num_threads}};
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  return nlohmann::json{{"kind", s.kind_name()},
                        {"mu", s.mu},
                        {"sigma", s.sigma},
                        {"alpha", s.alpha},
                        {"dim", s.dim}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() == "mean_shift") {
    return Scenario::mean_shift(j.at("mu").get<double>(),
                                j.at("alpha").get<double>(),
                                j.at("dim").get<int>());
  }
  return Scenario::variance_scale(j.at("sigma").get<double>(),
                                  j.at("alpha").get<double>(),
                                  j.at("dim").get<int>());
}

inline nlohmann::json to_json(const ExperimentRecord& r) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = {{"kind", r.config.kind},
                 {"scenario", scenario_to_json(r.config.scenario)},
                 {"sample_sizes", r.config.sample_sizes},
                 {"replicates", r.config.replicates},
                 {"seed", r.config.seed},
                 {"threshold_t", r.config.threshold_t},
                 {"grid", r.config.grid},
                 {"num_threads", r.config.num_threads},
                 {"retain_raw", r.config.retain_raw}};
  j["theory"] = {{"m", r.theory.m},
                 {"pdf_at_m", r.theory.pdf_at_m},
                 {"theta", r.theory.theta},
                 {"sigma_sq", r.theory.sigma_sq},
                 {"limit_variance", r.theory.limit_variance}};
  j["per_n"] = nlohmann::json::array();
  for (const auto& s : r.per_n) {
    nlohmann::json e{{"n", s.n},
                     {"mean", s.diag.mean},
                     {"variance", s.diag.variance},
                     {"skewness", s.diag.skewness},
                     {"excess_kurtosis", s.diag.excess_kurtosis},
                     {"max_cdf_distance", s.diag.max_cdf_distance},
                     {"variance_ratio", s.variance_ratio},
                     {"degenerate", s.degenerate}};
    if (!s.raw.empty()) e["raw"] = s.raw;
    j["per_n"].push_back(std::move(e));
  }
  if (!r.ecdf.empty()) {
    j["ecdf"] = nlohmann::json::array();
    for (const auto& p : r.ecdf) {
      j["ecdf"].push_back({{"t", p.t},
                           {"theory", p.theory},
                           {"mean", p.mean},
                           {"sd", p.sd}});
    }
  }
  if (r.gap) {
    j["gap"] = {{"frequency", r.gap->frequency},
                {"probability_bound", r.gap->probability_bound},
                {"gap", r.gap->gap},
                {"replicates", r.gap->replicates}};
  }
  return j;
}

inline ExperimentRecord experiment_record_from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  const auto& c = j.at("config");
  r.config.kind = c.at("kind").get<std::string>();
  r.config.scenario = scenario_from_json(c.at("scenario"));
  r.config.sample_sizes = c.at("sample_sizes").get<std::vector<int>>();
  r.config.replicates = c.at("replicates").get<int>();
  r.config.seed = c.at("seed").get<std::uint64_t>();
  r.config.threshold_t = c.at("threshold_t").get<double>();
  r.config.grid = c.at("grid").get<std::vector<double>>();
  r.config.num_threads = c.at("num_threads").get<unsigned>();
  r.config.retain_raw = c.at("retain_raw").get<bool>();
  const auto& t = j.at("theory");
  r.theory.m = t.at("m").get<double>();
  r.theory.pdf_at_m = t.at("pdf_at_m").get<double>();
  r.theory.theta = t.at("theta").get<double>();
  r.theory.sigma_sq = t.at("sigma_sq").get<double>();
  r.theory.limit_variance = t.at("limit_variance").get<double>();
  for (const auto& e : j.at("per_n")) {
    PerSampleSizeStats s;
    s.n = e.at("n").get<int>();
    s.diag.mean = e.at("mean").get<double>();
    s.diag.variance = e.at("variance").get<double>();
    s.diag.skewness = e.at("skewness").get<double>();
    s.diag.excess_kurtosis = e.at("excess_kurtosis").get<double>();
    s.diag.max_cdf_distance = e.at("max_cdf_distance").get<double>();
    s.variance_ratio = e.at("variance_ratio").get<double>();
    s.degenerate = e.at("degenerate").get<bool>();
    if (e.contains("raw")) s.raw = e.at("raw").get<std::vector<double>>();
    r.per_n.push_back(std::move(s));
  }
  if (j.contains("ecdf")) {
    for (const auto& e : j.at("ecdf")) {
      r.ecdf.push_back({e.at("t").get<double>(), e.at("theory").get<double>(),
                        e.at("mean").get<double>(), e.at("sd").get<double>()});
    }
  }
  if (j.contains("gap")) {
    GapExperimentResult g;
    g.frequency = j["gap"].at("frequency").get<double>();
    g.probability_bound = j["gap"].at("probability_bound").get<double>();
    g.gap = j["gap"].at("gap").get<double>();
    g.replicates = j["gap"].at("replicates").get<int>();
    r.gap = g;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Output writers
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const RunConfig& config,
                      const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "# medheur " << kVersion << "\n";
  out << "# config " << to_json(config).dump() << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_json_table(const std::string& path, const RunConfig& config,
                             const CsvTable& table) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = to_json(config);
  j["columns"] = table.columns;
  j["rows"] = table.rows;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_table(const std::string& path, const RunConfig& config,
                        const CsvTable& table) {
  if (config.format == OutputFormat::Csv) {
    write_csv(path, config, table);
  } else {
    write_json_table(path, config, table);
  }
}

inline std::string table_extension(const RunConfig& config) {
  return config.format == OutputFormat::Csv ? ".csv" : ".json";
}

// ---------------------------------------------------------------------------
// Figure 1: histograms of the squared pairwise distances
// ---------------------------------------------------------------------------

struct HistogramPanel {
  std::vector<double> edges;       // bins + 1
  std::vector<double> mean_count;  // per bin, averaged over replicates
  std::vector<double> sd_count;    // per bin, std over replicates
  double total_per_replicate = 0.0;
};

inline HistogramPanel histogram_panel(const Scenario& scenario, int n, int r,
                                      int bins, std::uint64_t seed,
                                      unsigned num_threads = 0) {
  if (r < 1 || bins < 2) {
    throw std::invalid_argument("histogram_panel: need r >= 1, bins >= 2");
  }
  std::vector<std::vector<double>> dists(static_cast<std::size_t>(r));
  parallel_for(dists.size(), num_threads, [&](std::size_t rep) {
    const SplitSample sample =
        draw_split_sample(scenario, n, derive_stream(seed, 2, rep));
    dists[rep] = pairwise_sq_distances(sample).sq_dists;
  });
  double lo = dists[0].front(), hi = dists[0].back();
  for (const auto& d : dists) {
    lo = std::fmin(lo, d.front());
    hi = std::fmax(hi, d.back());
  }
  if (!(hi > lo)) hi = lo + 1.0;
  HistogramPanel panel;
  panel.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) {
    panel.edges[b] = lo + (hi - lo) * b / bins;
  }
  panel.total_per_replicate = static_cast<double>(dists[0].size());
  std::vector<std::vector<double>> counts(
      dists.size(), std::vector<double>(bins, 0.0));
  for (std::size_t rep = 0; rep < dists.size(); ++rep) {
    for (double v : dists[rep]) {
      int b = static_cast<int>((v - lo) / (hi - lo) * bins);
      if (b < 0) b = 0;
      if (b >= bins) b = bins - 1;
      counts[rep][b] += 1.0;
    }
  }
  panel.mean_count.resize(bins);
  panel.sd_count.resize(bins);
  for (int b = 0; b < bins; ++b) {
    double mean = 0.0;
    for (const auto& c : counts) mean += c[b];
    mean /= static_cast<double>(r);
    double ss = 0.0;
    for (const auto& c : counts) ss += (c[b] - mean) * (c[b] - mean);
    panel.mean_count[b] = mean;
    panel.sd_count[b] = r > 1 ? std::sqrt(ss / (r - 1)) : 0.0;
  }
  return panel;
}

inline std::vector<std::string> run_figure1(const RunConfig& config) {
  const int n = config.n;
  const int r = config.replicates > 0 ? config.replicates : 10;
  const Scenario mean_scn = Scenario::mean_shift(config.mu, config.alpha,
                                                 config.dim);
  const Scenario var_scn = Scenario::variance_scale(config.sigma, config.alpha,
                                                    config.dim);
  std::vector<std::string> paths;
  const struct {
    const Scenario* scenario;
    const char* suffix;
  } panels[] = {{&mean_scn, "_mean"}, {&var_scn, "_var"}};
  for (const auto& p : panels) {
    const HistogramPanel panel = histogram_panel(*p.scenario, n, r,
                                                 config.bins, config.seed,
                                                 config.num_threads);
    CsvTable table;
    table.columns = {"bin_left", "bin_right", "mean_count", "sd_count"};
    for (std::size_t b = 0; b + 1 < panel.edges.size(); ++b) {
      table.rows.push_back({panel.edges[b], panel.edges[b + 1],
                            panel.mean_count[b], panel.sd_count[b]});
    }
    const std::string path = config.out + p.suffix + table_extension(config);
    write_table(path, config, table);
    paths.push_back(path);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Figure 2: bandwidths selected by the three approaches
// ---------------------------------------------------------------------------

struct BandwidthRow {
  double nu_med = 0.0;
  double nu_u = 0.0;
  double nu_l = 0.0;
  bool flat_u = false;
  bool flat_l = false;
};

inline BandwidthRow compute_bandwidth_row(const Scenario& scenario) {
  BandwidthRow row;
  row.nu_med = TargetDistribution(scenario).median_bandwidth_theoretical().nu;
  row.nu_u = maximize_power_ratio(scenario, StatisticKind::Quadratic,
                                  &row.flat_u).nu;
  row.nu_l = maximize_power_ratio(scenario, StatisticKind::Linear,
                                  &row.flat_l).nu;
  return row;
}

inline std::vector<std::string> run_figure2(
    const RunConfig& config, std::vector<std::string>* warnings = nullptr) {
  std::vector<std::string> paths;
  for (int panel = 0; panel < 2; ++panel) {
    const bool mean_panel = panel == 0;
    const auto& grid = mean_panel ? config.grid_mu : config.grid_sigma_sq;
    CsvTable table;
    table.columns = {mean_panel ? "mu" : "sigma_sq", "nu_med", "nu_u", "nu_l"};
    for (double param : grid) {
      const Scenario scenario =
          mean_panel
              ? Scenario::mean_shift(param, config.alpha, 1)
              : Scenario::variance_scale(std::sqrt(param), config.alpha, 1);
      const BandwidthRow row = compute_bandwidth_row(scenario);
      if (warnings != nullptr && (row.flat_u || row.flat_l)) {
        std::ostringstream msg;
        msg << "flat power criterion near the null at "
            << (mean_panel ? "mu=" : "sigma_sq=") << param
            << " (ratio < 1e-10); reported maximizer is weakly determined";
        warnings->push_back(msg.str());
      }
      table.rows.push_back({param, row.nu_med, row.nu_u, row.nu_l});
    }
    const std::string path = config.out + (mean_panel ? "_mean" : "_var") +
                             table_extension(config);
    write_table(path, config, table);
    paths.push_back(path);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Figure 3: approximate Bahadur slopes of the four tests
// ---------------------------------------------------------------------------

struct AbsRow {
  double quad_med_mean = 0.0, quad_med_sd = 0.0;
  double quad_pow_mean = 0.0, quad_pow_sd = 0.0;
  double lin_med = 0.0, lin_pow = 0.0;
};

// Five lambda1 estimates per bandwidth, sharing the sample seeds across the
// two bandwidth routes so their error bars are comparable.
inline AbsRow compute_abs_row(const Scenario& scenario, std::uint64_t seed,
                              int lambda1_points, int lambda1_reps) {
  AbsRow row;
  if (scenario.is_null()) return row;  // every slope is exactly zero
  const double nu_med =
      TargetDistribution(scenario).median_bandwidth_theoretical().nu;
  const double nu_u =
      maximize_power_ratio(scenario, StatisticKind::Quadratic).nu;
  const double nu_l = maximize_power_ratio(scenario, StatisticKind::Linear).nu;

  const auto slope_stats = [&](double nu, double* mean_out, double* sd_out) {
    const double mmd = population_mmd_sq(scenario, nu);
    std::vector<double> slopes(static_cast<std::size_t>(lambda1_reps));
    for (int rep = 0; rep < lambda1_reps; ++rep) {
      const double lam = estimate_lambda1(lambda1_points, scenario, nu,
                                          derive_stream(seed, 3, rep));
      slopes[rep] = abs_quadratic(mmd, lam).slope;
    }
    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= slopes.size();
    double ss = 0.0;
    for (double s : slopes) ss += (s - mean) * (s - mean);
    *mean_out = mean;
    *sd_out = std::sqrt(ss / (slopes.size() - 1));
  };
  slope_stats(nu_med, &row.quad_med_mean, &row.quad_med_sd);
  slope_stats(nu_u, &row.quad_pow_mean, &row.quad_pow_sd);

  row.lin_med = abs_linear(population_mmd_sq(scenario, nu_med),
                           sigma_lin_sq(scenario, nu_med)).slope;
  row.lin_pow = abs_linear(population_mmd_sq(scenario, nu_l),
                           sigma_lin_sq(scenario, nu_l)).slope;
  return row;
}

inline std::vector<std::string> run_figure3(const RunConfig& config) {
  std::vector<std::string> paths;
  for (int panel = 0; panel < 2; ++panel) {
    const bool mean_panel = panel == 0;
    const auto& grid = mean_panel ? config.grid_mu : config.grid_sigma_sq;
    CsvTable table;
    table.columns = {mean_panel ? "mu" : "sigma_sq",
                     "abs_quad_med_mean", "abs_quad_med_sd",
                     "abs_quad_pow_mean", "abs_quad_pow_sd",
                     "abs_lin_med", "abs_lin_pow"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Scenario scenario =
          mean_panel
              ? Scenario::mean_shift(grid[i], config.alpha, 1)
              : Scenario::variance_scale(std::sqrt(grid[i]), config.alpha, 1);
      const AbsRow row =
          compute_abs_row(scenario, derive_stream(config.seed, panel, i),
                          config.lambda1_points, config.lambda1_reps);
      table.rows.push_back({grid[i], row.quad_med_mean, row.quad_med_sd,
                            row.quad_pow_mean, row.quad_pow_sd, row.lin_med,
                            row.lin_pow});
    }
    const std::string path = config.out + (mean_panel ? "_mean" : "_var") +
                             table_extension(config);
    write_table(path, config, table);
    paths.push_back(path);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Figures 4/5: target CDF curves and power ratio curves over the bandwidth
// ---------------------------------------------------------------------------

inline std::vector<std::string> run_figure_curves(const RunConfig& config,
                                                  bool mean_panel) {
  const std::vector<double>& params = config.curve_params;
  const std::vector<double>& t_grid = config.grid_t;
  if (params.empty() || t_grid.empty() || config.grid_nu.empty()) {
    throw ConfigError("figure4/figure5 need curve-params, grid-t and grid-nu");
  }
  std::vector<Scenario> scenarios;
  for (double p : params) {
    scenarios.push_back(mean_panel
                            ? Scenario::mean_shift(p, config.alpha, 1)
                            : Scenario::variance_scale(std::sqrt(p),
                                                       config.alpha, 1));
  }
  std::vector<std::string> paths;

  CsvTable cdf_table;
  cdf_table.columns = {"t"};
  for (double p : params) {
    cdf_table.columns.push_back((mean_panel ? "F_mu_" : "F_sigma_sq_") +
                                format_double(p));
  }
  for (double t : t_grid) {
    std::vector<double> row{t};
    for (const auto& s : scenarios) {
      row.push_back(TargetDistribution(s).cdf(t));
    }
    cdf_table.rows.push_back(std::move(row));
  }
  paths.push_back(config.out + "_cdf" + table_extension(config));
  write_table(paths.back(), config, cdf_table);

  const struct {
    StatisticKind kind;
    const char* suffix;
    const char* prefix;
  } curves[] = {{StatisticKind::Linear, "_Rl", "Rl_"},
                {StatisticKind::Quadratic, "_Ru", "Ru_"}};
  for (const auto& curve : curves) {
    CsvTable table;
    table.columns = {"nu"};
    for (double p : params) {
      table.columns.push_back(curve.prefix +
                              std::string(mean_panel ? "mu_" : "sigma_sq_") +
                              format_double(p));
    }
    for (double nu : config.grid_nu) {
      std::vector<double> row{nu};
      for (const auto& s : scenarios) {
        row.push_back(power_ratio(s, nu, curve.kind).ratio);
      }
      table.rows.push_back(std::move(row));
    }
    paths.push_back(config.out + curve.suffix + table_extension(config));
    write_table(paths.back(), config, table);
  }
  return paths;
}

// ---------------------------------------------------------------------------
// CLT suite: the four verification experiments with pass/fail summary
// ---------------------------------------------------------------------------

struct CltSuiteResult {
  std::vector<std::string> record_paths;
  std::vector<std::string> summary_lines;
  bool all_passed = false;
};

inline CltSuiteResult run_clt_suite(const RunConfig& config) {
  const Scenario scenario = [&] {
    Scenario s = config.scenario();
    if (s.dim != 1) throw ConfigError("clt-suite requires dim == 1");
    return s;
  }();
  const int r = config.replicates > 0 ? config.replicates : 2000;
  const std::vector<int> ns{100, 200, 400};
  CltSuiteResult result;
  auto record_path = [&](const char* tag) {
    return config.out + "_" + tag + ".json";
  };
  auto emit = [&](const ExperimentRecord& rec, const char* tag) {
    std::ofstream out(record_path(tag));
    if (!out) throw std::runtime_error("cannot open output file: " +
                                       record_path(tag));
    out << to_json(rec).dump(2) << "\n";
    result.record_paths.push_back(record_path(tag));
  };
  bool ok = true;
  auto check = [&](const std::string& name, bool passed, double value) {
    std::ostringstream line;
    line << (passed ? "PASS" : "FAIL") << "  " << name << "  value="
         << value;
    result.summary_lines.push_back(line.str());
    ok = ok && passed;
  };

  // H_n CLT
  {
    const ExperimentRecord rec = clt_hn_experiment(
        scenario, ns, r, config.seed, config.num_threads);
    emit(rec, "hn");
    const auto& last = rec.per_n.back();
    const double predicted = rec.theory.limit_variance;
    const double rel = std::fabs(last.diag.variance - predicted) / predicted;
    check("hn variance within 15% of limit (n=400)", rel <= 0.15, rel);
    check("hn |skewness| < 0.15", std::fabs(last.diag.skewness) < 0.15,
          last.diag.skewness);
    check("hn |excess kurtosis| < 0.3",
          std::fabs(last.diag.excess_kurtosis) < 0.3,
          last.diag.excess_kurtosis);
    check("hn standardized CDF distance <= 0.05",
          last.diag.max_cdf_distance <= 0.05, last.diag.max_cdf_distance);
  }
  // U_n CLT at t = m
  {
    const double m = TargetDistribution(scenario).quantile(0.5);
    const ExperimentRecord rec = clt_ustat_experiment(
        scenario, m, ns, r, config.seed + 1, config.num_threads);
    emit(rec, "ustat");
    const auto& last = rec.per_n.back();
    const double predicted = rec.theory.limit_variance;
    const double rel = std::fabs(last.diag.variance - predicted) / predicted;
    check("ustat variance within 15% of limit (n=400)", rel <= 0.15, rel);
    check("ustat |skewness| < 0.15", std::fabs(last.diag.skewness) < 0.15,
          last.diag.skewness);
  }
  // ECDF convergence at n = 2000
  {
    const TargetDistribution target(scenario);
    std::vector<double> grid = config.grid_t;
    if (grid.empty()) {
      for (int k = 0; k < 50; ++k) {
        grid.push_back(target.quantile(0.02 + 0.96 * k / 49.0));
      }
    }
    const int ecdf_r = std::max(100, r / 10);
    const ExperimentRecord rec = ecdf_convergence_check(
        scenario, 2000, grid, ecdf_r, config.seed + 2, config.num_threads);
    emit(rec, "ecdf");
    double worst = 0.0;
    for (const auto& p : rec.ecdf) {
      if (p.sd > 0.0) {
        worst = std::fmax(worst, std::fabs(p.mean - p.theory) / p.sd);
      } else if (p.mean != p.theory) {
        worst = std::numeric_limits<double>::infinity();
      }
    }
    check("ecdf max |mean - F_T| <= 3 replicate sd", worst <= 3.0, worst);
  }
  // Gap lemma
  {
    const int gap_r = 100000;
    const Eigen::VectorXd mu_x = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd mu_y(1);
    mu_y << std::sqrt(2.0 * config.lambda);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(1);
    const GapExperimentResult gap = gap_lemma_experiment(
        mu_x, mu_y, ones, ones, config.lambda, gap_r, config.seed + 3,
        config.num_threads);
    ExperimentRecord rec;
    rec.config = {"gap", scenario, {},  gap_r, config.seed + 3,
                  0.0,   {},       config.num_threads, false};
    rec.gap = gap;
    emit(rec, "gap");
    const double p = gap.probability_bound;
    const double se = std::sqrt(p * (1.0 - p) / gap_r);
    check("gap frequency >= bound - 3 binomial se",
          gap.frequency >= p - 3.0 * se, gap.frequency);
  }
  result.all_passed = ok;
  return result;
}

// ---------------------------------------------------------------------------
// bandwidth / gap-check commands
// ---------------------------------------------------------------------------

inline std::string run_bandwidth(const RunConfig& config,
                                 std::vector<std::string>* warnings = nullptr) {
  const Scenario scenario = config.scenario();
  CsvTable table;
  table.columns = {"method", "nu", "h_value"};
  // method codes: 0 = theoretical median, 1 = power quad, 2 = power lin,
  // 3 = empirical median heuristic on a drawn sample
  if (scenario.dim == 1) {
    const BandwidthSelection med =
        TargetDistribution(scenario).median_bandwidth_theoretical();
    table.rows.push_back({0.0, med.nu, med.h_value});
    if (!scenario.is_null()) {
      bool flat = false;
      const BandwidthSelection u =
          maximize_power_ratio(scenario, StatisticKind::Quadratic, &flat);
      table.rows.push_back({1.0, u.nu, u.h_value});
      bool flat_l = false;
      const BandwidthSelection l =
          maximize_power_ratio(scenario, StatisticKind::Linear, &flat_l);
      table.rows.push_back({2.0, l.nu, l.h_value});
      if (warnings != nullptr && (flat || flat_l)) {
        warnings->push_back("flat power criterion near the null; "
                            "maximizer is weakly determined");
      }
    } else if (warnings != nullptr) {
      warnings->push_back("null scenario: power criteria are identically "
                          "zero, reporting the median route only");
    }
  }
  const SplitSample sample = draw_split_sample(scenario, config.n, config.seed);
  const BandwidthSelection emp =
      median_heuristic_bandwidth(sample, config.sqrt_h_convention);
  table.rows.push_back({3.0, emp.nu, emp.h_value});
  const std::string path = config.out + table_extension(config);
  write_table(path, config, table);
  return path;
}

struct GapCheckOutcome {
  GapExperimentResult result;
  bool passed = false;
  std::string path;
};

inline GapCheckOutcome run_gap_check(const RunConfig& config) {
  const int r = config.replicates > 0 ? config.replicates : 100000;
  const Eigen::VectorXd mu_x = Eigen::VectorXd::Zero(config.dim);
  const Eigen::VectorXd mu_y =
      Eigen::VectorXd::Constant(config.dim, std::sqrt(2.0 * config.lambda));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(config.dim);
  GapCheckOutcome outcome;
  outcome.result = gap_lemma_experiment(mu_x, mu_y, ones, ones, config.lambda,
                                        r, config.seed, config.num_threads);
  const double p = outcome.result.probability_bound;
  const double se = std::sqrt(p * (1.0 - p) / r);
  outcome.passed = outcome.result.frequency >= p - 3.0 * se;
  CsvTable table;
  table.columns = {"lambda", "frequency", "probability_bound", "passed"};
  table.rows.push_back({config.lambda, outcome.result.frequency, p,
                        outcome.passed ? 1.0 : 0.0});
  outcome.path = config.out + table_extension(config);
  write_table(outcome.path, config, table);
  return outcome;
}

}  // namespace medheur
