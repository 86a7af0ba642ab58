// Command-line driver for the median-heuristic analysis library: figure
// reproduction, CLT verification suite, gap-lemma checks and bandwidth
// reports. Exit codes: 0 success, 2 invalid configuration, 3 numerical or
// I/O failure.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "medheur/medheur.hpp"

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  // "start:step:end" ranges or comma-separated values
  if (text.find(':') != std::string::npos) {
    double start = 0, step = 0, end = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &step, &end) != 3 ||
        step <= 0) {
      throw medheur::ConfigError("bad grid range: " + text);
    }
    for (double v = start; v <= end + 1e-12 * step; v += step) {
      grid.push_back(v);
    }
    return grid;
  }
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw medheur::ConfigError("bad grid value: " + item);
    }
  }
  if (grid.empty()) throw medheur::ConfigError("empty grid: " + text);
  return grid;
}

void add_common_options(CLI::App* cmd, medheur::RunConfig& config,
                        std::string& grid_mu, std::string& grid_sigma_sq,
                        std::string& grid_nu, std::string& grid_t,
                        std::string& curve_params) {
  cmd->add_option("--scenario", config.scenario_kind,
                  "scenario: mean | var");
  cmd->add_option("--mu", config.mu, "mean shift of Q (mean scenario)");
  cmd->add_option("--sigma", config.sigma,
                  "std-dev scale of Q (var scenario)");
  cmd->add_option("--alpha", config.alpha, "split proportion in (0,1)");
  cmd->add_option("--dim", config.dim, "data dimension");
  cmd->add_option("--n", config.n, "sample size");
  cmd->add_option("--replicates", config.replicates, "replicate count");
  cmd->add_option("--seed", config.seed, "RNG seed (mandatory)")
      ->each([&config](const std::string&) { config.has_seed = true; });
  cmd->add_option("--grid-mu", grid_mu, "mu grid: list or start:step:end");
  cmd->add_option("--grid-sigma-sq", grid_sigma_sq, "sigma^2 grid");
  cmd->add_option("--grid-nu", grid_nu, "bandwidth grid");
  cmd->add_option("--grid-t", grid_t, "threshold grid");
  cmd->add_option("--curve-params", curve_params,
                  "parameter set for figure4/figure5 curves");
  cmd->add_option("--lambda", config.lambda, "separation ratio for gap-check");
  cmd->add_option("--bins", config.bins, "histogram bins (figure1)");
  cmd->add_option("--lambda1-points", config.lambda1_points,
                  "points per lambda1 estimate (figure3)");
  cmd->add_option("--lambda1-reps", config.lambda1_reps,
                  "lambda1 repetitions (figure3)");
  cmd->add_flag("--sqrt-h", config.sqrt_h_convention,
                "use nu = sqrt(H_n) instead of sqrt(H_n/2)");
  cmd->add_option("--out", config.out, "output path stem");
  cmd->add_option("--format", [&config](const std::vector<std::string>& v) {
        if (v.front() == "csv") {
          config.format = medheur::OutputFormat::Csv;
        } else if (v.front() == "json") {
          config.format = medheur::OutputFormat::Json;
        } else {
          return false;
        }
        return true;
      }, "output format: csv | json");
  cmd->add_option("--threads", config.num_threads,
                  "worker threads (0 = hardware)");
  cmd->add_flag("--dry-run", config.dry_run,
                "print the resolved config and exit without touching files");
  cmd->set_config("--config", "", "flat key=value config file; flags override");
}

int dispatch(const std::string& command, medheur::RunConfig& config) {
  config.command = command;
  config.validate();
  if (config.dry_run) {
    std::cout << medheur::to_json(config).dump(2) << "\n";
    return 0;
  }
  std::vector<std::string> warnings;
  std::vector<std::string> paths;
  if (command == "figure1") {
    paths = medheur::run_figure1(config);
  } else if (command == "figure2") {
    paths = medheur::run_figure2(config, &warnings);
  } else if (command == "figure3") {
    paths = medheur::run_figure3(config);
  } else if (command == "figure4") {
    paths = medheur::run_figure_curves(config, /*mean_panel=*/true);
  } else if (command == "figure5") {
    paths = medheur::run_figure_curves(config, /*mean_panel=*/false);
  } else if (command == "clt-suite") {
    const medheur::CltSuiteResult result = medheur::run_clt_suite(config);
    for (const auto& line : result.summary_lines) std::cout << line << "\n";
    for (const auto& p : result.record_paths) {
      std::cout << "wrote " << p << "\n";
    }
    return result.all_passed ? 0 : 3;
  } else if (command == "gap-check") {
    const medheur::GapCheckOutcome outcome = medheur::run_gap_check(config);
    std::cout << (outcome.passed ? "PASS" : "FAIL") << "  frequency="
              << outcome.result.frequency
              << " bound=" << outcome.result.probability_bound << "\n";
    std::cout << "wrote " << outcome.path << "\n";
    return outcome.passed ? 0 : 3;
  } else if (command == "bandwidth") {
    paths.push_back(medheur::run_bandwidth(config, &warnings));
  } else {
    throw medheur::ConfigError("unknown command: " + command);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& p : paths) std::cout << "wrote " << p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"median heuristic analysis for kernel two-sample testing"};
  app.require_subcommand(1);
  medheur::RunConfig config;
  std::string grid_mu, grid_sigma_sq, grid_nu, grid_t, curve_params;

  const std::vector<std::string> commands = {
      "figure1", "figure2", "figure3", "figure4",
      "figure5", "clt-suite", "gap-check", "bandwidth"};
  for (const auto& name : commands) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common_options(cmd, config, grid_mu, grid_sigma_sq, grid_nu, grid_t,
                       curve_params);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (!grid_mu.empty()) config.grid_mu = parse_grid(grid_mu);
    if (!grid_sigma_sq.empty()) config.grid_sigma_sq = parse_grid(grid_sigma_sq);
    if (!grid_nu.empty()) config.grid_nu = parse_grid(grid_nu);
    if (!grid_t.empty()) config.grid_t = parse_grid(grid_t);
    if (!curve_params.empty()) config.curve_params = parse_grid(curve_params);
    return dispatch(app.get_subcommands().front()->get_name(), config);
  } catch (const medheur::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
