#include "fxvol/evaluation.hpp"

#include "fxvol/csv.hpp"
#include "fxvol/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace fxvol {

namespace {

void require_scorable(const ForecastSeries& f) {
  if (f.size() == 0) {
    throw Error(ErrorKind::EmptySeries, fmt::format("no forecasts to score for '{}'", f.model_label));
  }
  if (f.predicted.size() != f.size() || f.realized.size() != f.size()) {
    throw Error(ErrorKind::MisalignedSeries, "predicted and realized lengths differ");
  }
}

ForecastSeries restrict_to(const ForecastSeries& f, const std::set<Date>& keep) {
  ForecastSeries out;
  out.model_label = f.model_label;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (keep.contains(f.dates[i])) {
      out.push_back(f.dates[i], f.predicted[i], f.realized[i]);
    }
  }
  return out;
}

std::vector<std::size_t> rank_rows(std::vector<ReportRow>& rows, std::optional<double> ReportRow::*metric,
                                   std::optional<std::size_t> ReportRow::*rank) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if ((rows[i].*metric).has_value()) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = *(rows[a].*metric);
    const double vb = *(rows[b].*metric);
    if (va != vb) return va < vb;
    if (rows[a].model_label != rows[b].model_label) return rows[a].model_label < rows[b].model_label;
    return rows[a].method_label < rows[b].method_label;
  });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const bool tied = pos > 0 && *(rows[order[pos]].*metric) == *(rows[order[pos - 1]].*metric);
    rows[order[pos]].*rank = tied ? rows[order[pos - 1]].*rank : std::optional<std::size_t>(pos + 1);
  }
  return order;
}

std::string fmt_metric(const std::optional<double>& v) { return v ? csv::format_double(*v) : "N/A"; }

std::string fmt_rank(const std::optional<std::size_t>& r) { return r ? std::to_string(*r) : "N/A"; }

}  // namespace

double rmse(const ForecastSeries& forecast) {
  require_scorable(forecast);
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double e = forecast.realized[i] - forecast.predicted[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(forecast.size()));
}

double mae(const ForecastSeries& forecast) {
  require_scorable(forecast);
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    sum += std::abs(forecast.realized[i] - forecast.predicted[i]);
  }
  return sum / static_cast<double>(forecast.size());
}

std::string to_string(Alignment alignment) {
  switch (alignment) {
    case Alignment::Strict: return "strict";
    case Alignment::Intersection: return "intersection";
    case Alignment::Union: return "union";
  }
  return "unknown";
}

Alignment parse_alignment(const std::string& text) {
  if (text == "strict") return Alignment::Strict;
  if (text == "intersection") return Alignment::Intersection;
  if (text == "union") return Alignment::Union;
  throw Error(ErrorKind::InvalidConfig, fmt::format("unknown alignment '{}'", text));
}

EvaluationReport build_report(const std::vector<EvaluationInput>& inputs, Alignment alignment) {
  EvaluationReport report;
  report.alignment = alignment;

  std::optional<std::set<Date>> common;
  for (const auto& in : inputs) {
    if (in.series.size() == 0) continue;
    const std::set<Date> dates(in.series.dates.begin(), in.series.dates.end());
    if (!common) {
      common = dates;
      continue;
    }
    if (alignment == Alignment::Strict && dates != *common) {
      throw Error(ErrorKind::MisalignedSeries,
                  fmt::format("'{}' ({}) covers different origins from the other models", in.series.model_label,
                              in.method_label));
    }
    std::set<Date> both;
    std::set_intersection(common->begin(), common->end(), dates.begin(), dates.end(),
                          std::inserter(both, both.end()));
    *common = std::move(both);
  }
  if (alignment != Alignment::Union && common && common->empty()) {
    throw Error(ErrorKind::MisalignedSeries, "forecast series share no origins");
  }

  for (const auto& in : inputs) {
    ReportRow row;
    row.model_label = in.series.model_label;
    row.method_label = in.method_label;
    row.n_forecasts = in.series.size();
    row.n_skipped = in.n_skipped;
    if (in.series.size() > 0) {
      const auto scored = alignment == Alignment::Union ? in.series : restrict_to(in.series, *common);
      row.n_scored = scored.size();
      row.rmse = rmse(scored);
      row.mae = mae(scored);
    }
    report.rows.push_back(std::move(row));
  }
  report.by_rmse = rank_rows(report.rows, &ReportRow::rmse, &ReportRow::rmse_rank);
  report.by_mae = rank_rows(report.rows, &ReportRow::mae, &ReportRow::mae_rank);
  return report;
}

std::string report_csv(const EvaluationReport& report) {
  std::string out = "model,method,rmse,mae,n_forecasts,n_skipped,n_scored,rmse_rank,mae_rank\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv::quote(r.model_label), csv::quote(r.method_label),
                       fmt_metric(r.rmse), fmt_metric(r.mae), r.n_forecasts, r.n_skipped, r.n_scored,
                       fmt_rank(r.rmse_rank), fmt_rank(r.mae_rank));
  }
  return out;
}

std::string report_table(const EvaluationReport& report, const std::string& title) {
  std::size_t model_w = 5;
  std::size_t method_w = 6;
  for (const auto& r : report.rows) {
    model_w = std::max(model_w, r.model_label.size());
    method_w = std::max(method_w, r.method_label.size());
  }
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string("N/A"); };
  std::string out;
  if (!title.empty()) out += title + "\n";
  const auto header = fmt::format("{:<{}}  {:<{}}  {:>10}  {:>10}  {:>6}  {:>7}  {:>6}\n", "Model", model_w, "Method",
                                  method_w, "RMSE", "MAE", "N", "Skipped", "Scored");
  out += header;
  out += std::string(header.size() - 1, '-') + "\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{:<{}}  {:<{}}  {:>10}  {:>10}  {:>6}  {:>7}  {:>6}\n", r.model_label, model_w, r.method_label,
                       method_w, cell(r.rmse), cell(r.mae), r.n_forecasts, r.n_skipped, r.n_scored);
  }
  out += fmt::format("alignment: {}\n", to_string(report.alignment));
  return out;
}

}  // namespace fxvol
