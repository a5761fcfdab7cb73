#pragma once

#include "fxvol/date.hpp"
#include "fxvol/forecaster.hpp"
#include "fxvol/marketdata.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxvol {

/// Black-Scholes call inputs: prices in currency units, continuously
/// compounded annual rate, maturity in years, annualised vol as a decimal.
struct BsInputs {
  double spot = 0.0;
  double strike = 0.0;
  double rate = 0.0;
  double maturity = 0.0;
  double sigma = 0.0;

  void validate() const;
};

double normal_cdf(double x);

double bs_call_price(const BsInputs& inputs);

/// Volatility that reproduces `price`, found by bracketed root search on
/// [1e-6, 5]. `inputs.sigma` is ignored. Throws PriceOutOfBand outside the
/// no-arbitrage band and NoConvergence when the root is not bracketed.
double implied_vol(double price, const BsInputs& inputs);

/// Square-root-of-time scaling of an annualised vol (%) to a horizon window.
double scale_annual_to_horizon(double implied_annual, std::size_t horizon_days, std::size_t trading_days = 252);

/// Vendor implied-vol quotes: date, annualised implied vol (%).
struct IvQuotes {
  std::vector<Date> dates;
  std::vector<double> implied_annual;
};

IvQuotes load_iv_csv(const std::filesystem::path& path, const std::string& date_column = "date",
                     const std::string& value_column = "implied_annual");
std::string iv_csv(const IvQuotes& quotes);

/// Regressors at each forecast origin: implied vol quoted that day and the
/// trailing realized proxy ending that day.
struct IvSeries {
  std::vector<Date> dates;
  std::vector<double> implied_annual;
  std::vector<double> realized_lag;

  [[nodiscard]] std::size_t size() const { return dates.size(); }
  [[nodiscard]] IvSeries slice(std::size_t first, std::size_t count) const;
};

/// Regressors plus the forward realized proxy they are meant to predict.
struct IvDataset {
  IvSeries regressors;
  std::vector<double> target;  // proxy over the `horizon` returns after each origin
  std::vector<std::size_t> origin_index;  // position of each origin in the return series
};

/// Joins IV quotes with the return series. A row exists for every return date
/// that has a quote, a full trailing proxy window and a full forward horizon.
IvDataset build_iv_dataset(const ReturnSeries& returns, const IvQuotes& quotes, std::size_t horizon,
                           std::size_t proxy_window);

enum class IvVariant { Model1, Model2 };
enum class IvUnits {
  PerDay,      // implied vol divided by sqrt(trading_days): same units as the proxy
  Annualized,  // raw vendor quote
};

struct OlsResult {
  std::vector<double> coef;  // intercept first
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  std::vector<double> residuals;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_stat = 0.0;
  double f_pvalue = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  std::size_t df_resid = 0;
};

/// Least squares with an intercept column prepended to `columns`.
/// Throws SingularDesign for rank-deficient designs and TooFewObservations
/// when there are fewer rows than coefficients.
OlsResult ols(const std::vector<std::vector<double>>& columns, std::span<const double> y);

struct IvRegressionModel {
  IvVariant variant = IvVariant::Model1;
  IvUnits units = IvUnits::PerDay;
  std::size_t trading_days = 252;
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::optional<double> beta2;
  OlsResult ols;

  [[nodiscard]] std::string label() const;  // "IV-Model1" / "IV-Model2"
};

IvRegressionModel fit_iv_regression(IvVariant variant, std::span<const double> target, const IvSeries& regressors,
                                    std::size_t train_len, IvUnits units = IvUnits::PerDay,
                                    std::size_t trading_days = 252);

struct IvPrediction {
  ForecastSeries series;
  std::size_t floored = 0;  // negative predictions clamped to zero
};

IvPrediction predict_iv_regression(const IvRegressionModel& model, const IvSeries& regressors,
                                   std::span<const double> realized);

/// Plain-text summary laid out like a statsmodels OLS table.
std::string regression_report(const IvRegressionModel& model, const std::string& dep_variable = "target_vol");

}  // namespace fxvol
