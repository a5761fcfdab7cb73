#pragma once

#include "fxvol/forecaster.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fxvol {

/// Root mean squared error of predicted against realized. Throws EmptySeries.
double rmse(const ForecastSeries& forecast);

/// Mean absolute error of predicted against realized. Throws EmptySeries.
double mae(const ForecastSeries& forecast);

/// How origin sets are reconciled across models before scoring.
enum class Alignment {
  Strict,        // every non-empty series must cover the same origins
  Intersection,  // score all models on the origins they share
  Union,         // score each model on its own origins
};

std::string to_string(Alignment alignment);
Alignment parse_alignment(const std::string& text);

struct EvaluationInput {
  ForecastSeries series;
  std::string method_label;
  std::size_t n_skipped = 0;
};

struct ReportRow {
  std::string model_label;
  std::string method_label;
  std::optional<double> rmse;  // empty: no forecasts survived (N/A)
  std::optional<double> mae;
  std::size_t n_forecasts = 0;  // forecasts the model produced
  std::size_t n_skipped = 0;    // origins the model failed on
  std::size_t n_scored = 0;     // forecasts used after alignment
  std::optional<std::size_t> rmse_rank;
  std::optional<std::size_t> mae_rank;
};

struct EvaluationReport {
  Alignment alignment = Alignment::Intersection;
  std::vector<ReportRow> rows;
  std::vector<std::size_t> by_rmse;  // row indices, best first, N/A rows excluded
  std::vector<std::size_t> by_mae;
};

/// One row per input. Ties share a rank and keep label order.
/// Throws MisalignedSeries under Strict when origin sets differ, or when the
/// intersection of non-empty series is empty.
EvaluationReport build_report(const std::vector<EvaluationInput>& inputs,
                              Alignment alignment = Alignment::Intersection);

/// model,method,rmse,mae,n_forecasts,n_skipped,n_scored,rmse_rank,mae_rank
std::string report_csv(const EvaluationReport& report);

/// Aligned plain-text table, N/A for empty rows.
std::string report_table(const EvaluationReport& report, const std::string& title = {});

}  // namespace fxvol
