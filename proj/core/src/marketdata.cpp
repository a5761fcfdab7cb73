#include "fxvol/marketdata.hpp"

#include "fxvol/csv.hpp"
#include "fxvol/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

namespace fxvol {

void PriceSeries::validate() const {
  if (dates.size() != close.size()) {
    throw Error(ErrorKind::MalformedRow, "dates and closes differ in length");
  }
  if (close.size() < 2) {
    throw Error(ErrorKind::EmptySeries, fmt::format("price series has {} rows, need at least 2", close.size()));
  }
  for (std::size_t i = 0; i < close.size(); ++i) {
    if (!(close[i] > 0.0) || !std::isfinite(close[i])) {
      throw Error(ErrorKind::MalformedRow, fmt::format("row {}: close must be positive", i));
    }
    if (i > 0 && !(dates[i - 1] < dates[i])) {
      throw Error(ErrorKind::MalformedRow,
                  fmt::format("row {}: date {} not after {}", i, dates[i].iso(), dates[i - 1].iso()));
    }
  }
}

ReturnSeries ReturnSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > returns.size()) {
    throw Error(ErrorKind::InvalidInputs, "slice out of range");
  }
  ReturnSeries out;
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(first),
                   dates.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.returns.assign(returns.begin() + static_cast<std::ptrdiff_t>(first),
                     returns.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

PriceSeries load_prices(const std::filesystem::path& path, const CsvSchema& schema, RowPolicy policy,
                        LoadReport* report) {
  const auto table = csv::read(path);
  const auto date_col = table.column(schema.date_column);
  const auto close_col = table.column(schema.close_column);
  if (!date_col || !close_col) {
    throw Error(ErrorKind::MalformedRow,
                fmt::format("'{}': header lacks column '{}' or '{}'", path.string(), schema.date_column,
                            schema.close_column));
  }

  std::vector<std::pair<Date, double>> rows;
  rows.reserve(table.rows.size());
  auto reject = [&](std::size_t line, std::string reason) {
    if (policy == RowPolicy::Reject) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: {}", path.string(), line, reason));
    }
    if (report != nullptr) {
      report->skipped.push_back({line, std::move(reason)});
    }
  };

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    const auto line = table.line_numbers[r];
    if (fields.size() <= std::max(*date_col, *close_col)) {
      reject(line, "too few fields");
      continue;
    }
    const auto date = Date::parse(fields[*date_col]);
    if (!date) {
      reject(line, fmt::format("unparseable date '{}'", fields[*date_col]));
      continue;
    }
    double close = 0.0;
    if (!csv::parse_double(fields[*close_col], close) || !std::isfinite(close)) {
      reject(line, fmt::format("missing or unparseable close '{}'", fields[*close_col]));
      continue;
    }
    if (close <= 0.0) {
      reject(line, fmt::format("non-positive close {}", fields[*close_col]));
      continue;
    }
    rows.emplace_back(*date, close);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw Error(ErrorKind::MalformedRow,
                  fmt::format("'{}': duplicate date {}", path.string(), rows[i].first.iso()));
    }
  }
  if (rows.size() < 2) {
    throw Error(ErrorKind::EmptySeries,
                fmt::format("'{}' yields {} valid rows, need at least 2", path.string(), rows.size()));
  }

  PriceSeries prices;
  prices.dates.reserve(rows.size());
  prices.close.reserve(rows.size());
  for (const auto& [date, close] : rows) {
    prices.dates.push_back(date);
    prices.close.push_back(close);
  }
  return prices;
}

namespace {

template <typename Values>
void write_dated(const std::filesystem::path& path, const std::vector<Date>& dates, const Values& values,
                 std::string_view value_header) {
  std::string out = fmt::format("Date,{}\n", value_header);
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out += dates[i].iso();
    out += ',';
    out += csv::format_double(values[i]);
    out += '\n';
  }
  csv::write_atomic(path, out);
}

}  // namespace

void write_prices(const std::filesystem::path& path, const PriceSeries& prices) {
  write_dated(path, prices.dates, prices.close, "Close");
}

void write_returns(const std::filesystem::path& path, const ReturnSeries& returns) {
  write_dated(path, returns.dates, returns.returns, "Returns");
}

ReturnSeries read_returns(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto date_col = table.column("Date");
  const auto value_col = table.column("Returns");
  if (!date_col || !value_col) {
    throw Error(ErrorKind::MalformedRow, fmt::format("'{}': expected columns Date,Returns", path.string()));
  }
  ReturnSeries out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    const auto date = fields.size() > std::max(*date_col, *value_col) ? Date::parse(fields[*date_col]) : std::nullopt;
    double value = 0.0;
    if (!date || !csv::parse_double(fields[*value_col], value) || !std::isfinite(value)) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: bad return row", path.string(), table.line_numbers[r]));
    }
    if (!out.dates.empty() && !(out.dates.back() < *date)) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: dates not increasing", path.string(), table.line_numbers[r]));
    }
    out.dates.push_back(*date);
    out.returns.push_back(value);
  }
  if (out.returns.empty()) {
    throw Error(ErrorKind::EmptySeries, fmt::format("'{}' has no returns", path.string()));
  }
  return out;
}

void write_proxy(const std::filesystem::path& path, const VolProxySeries& proxy) {
  write_dated(path, proxy.dates, proxy.proxy, fmt::format("Proxy{}", proxy.window));
}

ReturnSeries compute_returns(const PriceSeries& prices) {
  if (prices.size() < 2) {
    throw Error(ErrorKind::EmptySeries, "need at least two prices to form a return");
  }
  ReturnSeries out;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.returns.resize(prices.size() - 1);
  for (std::size_t i = 0; i + 1 < prices.size(); ++i) {
    out.returns[i] = 100.0 * (prices.close[i + 1] / prices.close[i] - 1.0);
  }
  return out;
}

PriceSeries smooth_outliers(const PriceSeries& prices, double threshold_pct, std::size_t* replaced) {
  if (!(threshold_pct > 0.0)) {
    throw Error(ErrorKind::InvalidInputs, "outlier threshold must be positive");
  }
  PriceSeries out = prices;
  std::size_t count = 0;
  const auto n = prices.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // Left-to-right: the move is measured from the already smoothed previous
    // close, so the rebound after a replaced spike is not flagged again.
    const double move = 100.0 * std::abs(prices.close[i] / out.close[i - 1] - 1.0);
    if (move > threshold_pct) {
      out.close[i] = 0.5 * (prices.close[i - 1] + prices.close[i + 1]);
      ++count;
    }
  }
  if (replaced != nullptr) {
    *replaced = count;
  }
  return out;
}

double sample_std(std::span<const double> values) {
  const auto n = values.size();
  if (n < 2) {
    throw Error(ErrorKind::TooFewObservations, "sample std needs at least two values");
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double sorted_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) {
    throw Error(ErrorKind::EmptySeries, "quantile of empty data");
  }
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DistributionStats distribution_stats(std::span<const double> values) {
  const auto n = values.size();
  if (n < 4) {
    throw Error(ErrorKind::TooFewObservations,
                fmt::format("distribution statistics need at least 4 observations, got {}", n));
  }
  const double nd = static_cast<double>(n);
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / nd;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;

  DistributionStats stats;
  stats.count = n;
  stats.mean = mean;
  stats.std = std::sqrt(m2 * nd / (nd - 1.0));
  // Bias-adjusted Fisher-Pearson skewness and excess kurtosis; zero when the
  // data has no spread.
  if (m2 > 0.0) {
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    stats.skew = std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * g1;
    stats.kurt = (nd - 1.0) / ((nd - 2.0) * (nd - 3.0)) * ((nd + 1.0) * g2 + 6.0);
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  stats.min = sorted.front();
  stats.q25 = sorted_quantile(sorted, 0.25);
  stats.median = sorted_quantile(sorted, 0.5);
  stats.q75 = sorted_quantile(sorted, 0.75);
  stats.max = sorted.back();
  return stats;
}

VolProxySeries realized_vol(const ReturnSeries& returns, std::size_t window) {
  if (window < 2) {
    throw Error(ErrorKind::TooFewObservations, "proxy window must be at least 2");
  }
  if (returns.size() < window) {
    throw Error(ErrorKind::TooFewObservations,
                fmt::format("{} returns cannot fill a {}-day window", returns.size(), window));
  }
  VolProxySeries out;
  out.window = window;
  const auto count = returns.size() - window + 1;
  out.dates.reserve(count);
  out.proxy.reserve(count);
  const std::span<const double> all(returns.returns);
  for (std::size_t i = 0; i < count; ++i) {
    out.proxy.push_back(sample_std(all.subspan(i, window)));
    out.dates.push_back(returns.dates[i + window - 1]);
  }
  return out;
}

SampleSplit split_sample(const ReturnSeries& returns, std::size_t holdout) {
  if (holdout == 0 || holdout >= returns.size()) {
    throw Error(ErrorKind::HoldoutTooLarge,
                fmt::format("holdout {} must be in (0, {})", holdout, returns.size()));
  }
  SampleSplit split;
  split.split_index = returns.size() - holdout;
  split.in_sample = returns.slice(0, split.split_index);
  split.out_of_sample = returns.slice(split.split_index, holdout);
  return split;
}

std::string format_stats(const DistributionStats& s, const std::string& name) {
  std::string out;
  out += fmt::format("count    {:.6f}\n", static_cast<double>(s.count));
  out += fmt::format("mean     {:.6f}\n", s.mean);
  out += fmt::format("std      {:.6f}\n", s.std);
  out += fmt::format("skew     {:.6f}\n", s.skew);
  out += fmt::format("kurt     {:.6f}\n", s.kurt);
  out += fmt::format("min      {:.6f}\n", s.min);
  out += fmt::format("25%      {:.6f}\n", s.q25);
  out += fmt::format("50%      {:.6f}\n", s.median);
  out += fmt::format("75%      {:.6f}\n", s.q75);
  out += fmt::format("max      {:.6f}\n", s.max);
  out += fmt::format("Name: {}, dtype: float64\n", name);
  return out;
}

}  // namespace fxvol
