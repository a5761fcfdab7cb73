#pragma once

#include "fxvol/date.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fxvol {

/// Dated close prices. Dates strictly increasing, closes positive, length >= 2
/// once validated.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> close;

  [[nodiscard]] std::size_t size() const { return close.size(); }
  /// Throws Error(MalformedRow / EmptySeries) when an invariant is broken.
  void validate() const;
};

/// Daily percent returns, each dated at the later of the two closes.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> returns;

  [[nodiscard]] std::size_t size() const { return returns.size(); }
  [[nodiscard]] ReturnSeries slice(std::size_t first, std::size_t count) const;
};

struct DistributionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double skew = 0.0;
  double kurt = 0.0;  // excess
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

/// Rolling sample standard deviation of returns. Entry i covers
/// returns[i, i + window) and is dated at the last return in that window.
struct VolProxySeries {
  std::vector<Date> dates;
  std::vector<double> proxy;
  std::size_t window = 0;

  [[nodiscard]] std::size_t size() const { return proxy.size(); }
};

struct SampleSplit {
  ReturnSeries in_sample;
  ReturnSeries out_of_sample;
  std::size_t split_index = 0;
};

struct CsvSchema {
  std::string date_column = "Date";
  std::string close_column = "Close";
};

enum class RowPolicy {
  Reject,  // first bad row raises MalformedRow
  Skip,    // bad rows are dropped and listed in LoadReport
};

struct SkippedRow {
  std::size_t line = 0;
  std::string reason;
};

struct LoadReport {
  std::vector<SkippedRow> skipped;
};

PriceSeries load_prices(const std::filesystem::path& path, const CsvSchema& schema = {},
                        RowPolicy policy = RowPolicy::Reject, LoadReport* report = nullptr);

void write_prices(const std::filesystem::path& path, const PriceSeries& prices);
void write_returns(const std::filesystem::path& path, const ReturnSeries& returns);
/// Reads a file produced by write_returns.
ReturnSeries read_returns(const std::filesystem::path& path);
void write_proxy(const std::filesystem::path& path, const VolProxySeries& proxy);

ReturnSeries compute_returns(const PriceSeries& prices);

inline constexpr double kDefaultOutlierThreshold = 8.0;

/// Single left-to-right pass: an interior close whose percent move from the
/// previous (already smoothed) close exceeds `threshold_pct` becomes the
/// midpoint of its original neighbours. Endpoints are never modified.
PriceSeries smooth_outliers(const PriceSeries& prices, double threshold_pct,
                            std::size_t* replaced = nullptr);

DistributionStats distribution_stats(std::span<const double> values);
inline DistributionStats distribution_stats(const ReturnSeries& returns) {
  return distribution_stats(returns.returns);
}

/// Sample standard deviation with the n-1 denominator.
double sample_std(std::span<const double> values);

/// Linear-interpolation quantile of already sorted data.
double sorted_quantile(std::span<const double> sorted, double prob);

VolProxySeries realized_vol(const ReturnSeries& returns, std::size_t window);

SampleSplit split_sample(const ReturnSeries& returns, std::size_t holdout);

std::string format_stats(const DistributionStats& stats, const std::string& name = "Returns");

}  // namespace fxvol
