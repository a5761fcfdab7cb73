#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace fxvol::pipeline {

/// Output tree: <root>/{data,grids,forecasts,reports}/<pair>/...
struct Layout {
  std::filesystem::path root;

  [[nodiscard]] std::filesystem::path data(const std::string& pair) const { return root / "data" / pair; }
  [[nodiscard]] std::filesystem::path grids(const std::string& pair) const { return root / "grids" / pair; }
  [[nodiscard]] std::filesystem::path forecasts(const std::string& pair) const {
    return root / "forecasts" / pair;
  }
  [[nodiscard]] std::filesystem::path reports(const std::string& pair) const { return root / "reports" / pair; }
};

/// File-name form of a model label: "GJR(1,1,1)-t" -> "gjr_1_1_1_t".
std::string slug(const std::string& label);

/// Cleans prices and writes prices, returns, proxy, stats (and IV quotes when
/// configured) under data/. Every input is read before anything is written.
void cmd_prepare(const PipelineConfig& config, std::ostream& log);

/// AIC/BIC matrices per family and distribution on the in-sample returns,
/// plus summary.csv and distribution_comparison.csv.
void cmd_grid(const PipelineConfig& config, std::ostream& log);

/// Out-of-sample forecasts for EWMA, each spec and window method, and the IV
/// regressions. Writes one CSV per (model, method), skip manifests for failed
/// origins and manifest.csv indexing them.
void cmd_backtest(const PipelineConfig& config, std::ostream& log);

/// RMSE/MAE tables from the forecast files. Throws MissingInputs when a pair
/// has no forecasts.
void cmd_evaluate(const PipelineConfig& config, std::ostream& log);

void run_all(const PipelineConfig& config, std::ostream& log);

}  // namespace fxvol::pipeline
