#pragma once

#include "fxvol/estimator.hpp"
#include "fxvol/ewma.hpp"
#include "fxvol/garch.hpp"
#include "fxvol/marketdata.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fxvol {

enum class WindowMode { Rolling, Expanding };

struct ForecastMethod {
  WindowMode mode = WindowMode::Rolling;
  std::size_t window = 200;   // Rolling only
  std::size_t horizon = 20;
  std::size_t refit_every = 1;
  /// Start each fit from the previous origin's optimum.
  bool warm_start = true;
  /// Rolling origins with less history than `window` fit on what is
  /// available instead of being skipped.
  bool truncate_short_windows = false;
  /// Skip EGARCH/TGARCH origins whose fit does not mean-revert: simulated
  /// paths from such fits diverge. GARCH/GJR paths are analytic and kept.
  bool skip_explosive_simulations = true;

  static ForecastMethod rolling(std::size_t window = 200, std::size_t horizon = 20);
  static ForecastMethod expanding(std::size_t horizon = 20);

  void validate() const;
  [[nodiscard]] std::string label() const;  // "rolling" / "expanding"
};

/// Horizon volatility forecasts paired with the realized proxy over the same
/// horizon, keyed by forecast origin date.
struct ForecastSeries {
  std::vector<Date> dates;
  std::vector<double> predicted;
  std::vector<double> realized;
  std::string model_label;

  [[nodiscard]] std::size_t size() const { return dates.size(); }
  void push_back(Date date, double predicted_value, double realized_value);
};

struct SkippedOrigin {
  Date date;
  std::string reason;
};

struct BacktestResult {
  ForecastSeries series;
  std::vector<SkippedOrigin> skipped;
  std::size_t origin_count = 0;
};

struct MonteCarloOptions {
  std::size_t paths = 1000;
  std::uint64_t seed = 20230615;
  bool antithetic = true;
};

/// E[sigma^2_{t+h}] for h = 1..horizon from the trailing state. GARCH and GJR
/// iterate the analytic recursion; EGARCH and TGARCH average seeded
/// simulated paths.
std::vector<double> variance_path_forecast(const GarchSpec& spec, const GarchParams& params, const LagState& state,
                                           std::size_t horizon, const MonteCarloOptions& mc = {});

/// Root of the mean forward variance over the first `horizon` steps.
double horizon_vol(std::span<const double> path, std::size_t horizon);

/// Origin indices into the full return series: out-of-sample positions whose
/// following `horizon` returns lie inside the sample, stepped by refit_every.
std::vector<std::size_t> forecast_origins(std::size_t total, std::size_t split_index, std::size_t horizon,
                                          std::size_t refit_every);

/// Out-of-sample backtest of one GARCH-family spec. `returns` is the full
/// series that `split` was cut from. Origins whose fit fails are skipped and
/// recorded; throws NoValidOrigins if every origin was skipped.
BacktestResult backtest(const GarchSpec& spec, const ReturnSeries& returns, const SampleSplit& split,
                        const ForecastMethod& method, const OptimizerConfig& config = {},
                        const MonteCarloOptions& mc = {});

BacktestResult ewma_backtest(const ReturnSeries& returns, const SampleSplit& split, const EwmaConfig& config,
                             std::size_t horizon, std::size_t refit_every = 1);

std::string ewma_label(const EwmaConfig& config);

/// origin_date,model_label,predicted,realized
std::string forecast_csv(const ForecastSeries& series);
ForecastSeries read_forecast_csv(const std::filesystem::path& path);

/// origin_date,reason
std::string skipped_csv(const std::vector<SkippedOrigin>& skipped);
std::vector<SkippedOrigin> read_skipped_csv(const std::filesystem::path& path);

}  // namespace fxvol
