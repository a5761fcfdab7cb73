#pragma once

#include <fxvol/estimator.hpp>
#include <fxvol/evaluation.hpp>
#include <fxvol/ewma.hpp>
#include <fxvol/forecaster.hpp>
#include <fxvol/garch.hpp>
#include <fxvol/ivmodel.hpp>
#include <fxvol/marketdata.hpp>
#include <fxvol/selection.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fxvol::pipeline {

struct PairConfig {
  std::string name;
  std::filesystem::path prices;
  std::optional<std::filesystem::path> iv;  // vendor implied vol quotes
};

struct PipelineConfig {
  std::vector<PairConfig> pairs;
  CsvSchema schema;
  bool skip_bad_rows = false;

  bool smoothing = true;
  double outlier_threshold_pct = kDefaultOutlierThreshold;

  std::size_t proxy_window = 20;
  std::size_t holdout = 365;

  EwmaConfig ewma;

  int grid_p_max = 5;
  int grid_q_max = 5;
  std::vector<Family> grid_families{Family::Garch, Family::Egarch, Family::Gjr, Family::Tgarch};
  std::vector<Distribution> distributions{Distribution::Normal, Distribution::StudentT};
  GridOptions grid;

  /// Specs to backtest. Empty: take the BIC winners from the grid stage.
  std::vector<GarchSpec> specs;
  std::vector<WindowMode> methods{WindowMode::Rolling, WindowMode::Expanding};
  std::size_t window = 200;
  std::size_t horizon = 20;
  std::size_t refit_every = 1;
  bool warm_start = true;
  bool truncate_short_windows = false;
  std::size_t mc_paths = 1000;

  OptimizerConfig optimizer;

  IvUnits iv_units = IvUnits::PerDay;
  std::size_t trading_days = 252;

  Alignment alignment = Alignment::Intersection;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 20230615;

  /// Throws Error(InvalidConfig) for non-positive bounds or missing input files.
  void validate() const;

  [[nodiscard]] ForecastMethod method(WindowMode mode) const;
  [[nodiscard]] MonteCarloOptions monte_carlo() const;
};

/// Parses a JSON document after applying "dotted.key=value" overrides, where
/// value is JSON or a bare string. Input paths resolve against `base_dir`,
/// the output directory against the working directory.
PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {},
                            const std::vector<std::string>& overrides = {});

/// Reads a JSON config file; input paths resolve against its directory.
PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Built-in configuration, with input paths relative to the repository root.
std::string default_config_json();

}  // namespace fxvol::pipeline
