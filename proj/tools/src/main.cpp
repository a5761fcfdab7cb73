#include "config.hpp"
#include "pipeline.hpp"
#include "synthetic.hpp"

#include <fxvol/csv.hpp>
#include <fxvol/error.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace {

namespace fs = std::filesystem;
using namespace fxvol;

struct GlobalOptions {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

pipeline::PipelineConfig resolve_config(const GlobalOptions& g) {
  auto overrides = g.overrides;
  if (g.output_dir) overrides.push_back(fmt::format("output_dir=\"{}\"", *g.output_dir));
  if (g.seed) overrides.push_back(fmt::format("seed={}", *g.seed));
  if (g.workers) overrides.push_back(fmt::format("grid.workers={}", *g.workers));
  if (g.config_path) return pipeline::load_config(*g.config_path, overrides);
  return pipeline::parse_config(pipeline::default_config_json(), fs::current_path(), overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volatility forecasting pipeline: prepare, grid, backtest, evaluate"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("-c,--config", g.config_path, "JSON config file (built-in defaults otherwise)")->check(CLI::ExistingFile);
  app.add_option("-s,--set", g.overrides, "Override a config key, e.g. backtest.window=250")->take_all();
  app.add_option("-o,--output-dir", g.output_dir, "Output directory");
  app.add_option("--seed", g.seed, "Seed for optimizer restarts and Monte Carlo");
  app.add_option("--workers", g.workers, "Concurrent grid cells");

  auto* prepare = app.add_subcommand("prepare", "Clean prices and write returns, proxy and statistics");
  auto* grid = app.add_subcommand("grid", "AIC/BIC order-selection matrices");
  auto* backtest = app.add_subcommand("backtest", "Out-of-sample forecasts per model and window method");
  auto* evaluate = app.add_subcommand("evaluate", "RMSE/MAE tables from forecast files");
  auto* run_all = app.add_subcommand("run-all", "prepare, grid, backtest and evaluate in sequence");
  auto* print_config = app.add_subcommand("print-config", "Print the effective configuration defaults as JSON");

  auto* simulate = app.add_subcommand("simulate", "Write the synthetic demonstration dataset");
  pipeline::SyntheticOptions sim;
  std::string sim_dir = "data/synthetic";
  std::string sim_name = "SYN";
  simulate->add_option("--dir", sim_dir, "Destination directory")->capture_default_str();
  simulate->add_option("--name", sim_name, "File prefix")->capture_default_str();
  simulate->add_option("--n", sim.n_returns, "Number of returns")->capture_default_str();
  simulate->add_option("--sim-seed", sim.seed, "Generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_config->parsed()) {
      std::cout << pipeline::default_config_json();
      return 0;
    }
    if (simulate->parsed()) {
      const auto data = pipeline::make_synthetic(sim);
      const fs::path dir(sim_dir);
      write_prices(dir / (sim_name + "_prices.csv"), data.prices);
      csv::write_atomic(dir / (sim_name + "_iv.csv"), iv_csv(data.iv));
      fmt::print(stderr, "simulate: {} prices and {} IV quotes written to {}\n", data.prices.size(), data.iv.dates.size(),
                 dir.string());
      return 0;
    }
    const auto config = resolve_config(g);
    if (prepare->parsed()) pipeline::cmd_prepare(config, std::cerr);
    if (grid->parsed()) pipeline::cmd_grid(config, std::cerr);
    if (backtest->parsed()) pipeline::cmd_backtest(config, std::cerr);
    if (evaluate->parsed()) pipeline::cmd_evaluate(config, std::cerr);
    if (run_all->parsed()) pipeline::run_all(config, std::cerr);
  } catch (const Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", to_string(e.kind()), e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
