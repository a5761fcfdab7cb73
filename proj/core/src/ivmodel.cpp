#include "fxvol/ivmodel.hpp"

#include "fxvol/csv.hpp"
#include "fxvol/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

namespace fxvol {

void BsInputs::validate() const {
  if (!(spot > 0.0) || !(strike > 0.0) || !(maturity > 0.0) || !(sigma > 0.0) || !std::isfinite(rate) ||
      !std::isfinite(spot) || !std::isfinite(strike) || !std::isfinite(maturity) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidInputs, "Black-Scholes needs positive spot, strike, maturity and sigma");
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

struct BsLegs {
  double forward_intrinsic;  // S - K e^{-rT}
  double call;
  double put;
};

// Each leg is evaluated where it is small so the time value keeps its
// relative precision; the other follows from put-call parity.
BsLegs bs_legs(const BsInputs& in) {
  const double root_t = std::sqrt(in.maturity);
  const double vol_t = in.sigma * root_t;
  const double d1 = (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.sigma * in.sigma) * in.maturity) / vol_t;
  const double d2 = d1 - vol_t;
  const double discounted_strike = in.strike * std::exp(-in.rate * in.maturity);
  BsLegs legs{};
  legs.forward_intrinsic = in.spot - discounted_strike;
  if (legs.forward_intrinsic > 0.0) {
    legs.put = std::max(normal_cdf(-d2) * discounted_strike - normal_cdf(-d1) * in.spot, 0.0);
    legs.call = legs.forward_intrinsic + legs.put;
  } else {
    legs.call = std::max(normal_cdf(d1) * in.spot - normal_cdf(d2) * discounted_strike, 0.0);
    legs.put = legs.call - legs.forward_intrinsic;
  }
  return legs;
}

}  // namespace

double bs_call_price(const BsInputs& in) {
  in.validate();
  return bs_legs(in).call;
}

double implied_vol(double price, const BsInputs& inputs) {
  BsInputs probe = inputs;
  probe.sigma = 1.0;
  probe.validate();
  const double forward_intrinsic = inputs.spot - inputs.strike * std::exp(-inputs.rate * inputs.maturity);
  const double lower = std::max(forward_intrinsic, 0.0);
  if (!(price > lower) || !(price < inputs.spot)) {
    throw Error(ErrorKind::PriceOutOfBand,
                fmt::format("price {} outside no-arbitrage band ({}, {})", price, lower, inputs.spot));
  }
  // In the money the search runs on the put so the small time value is matched
  // directly instead of as a difference of two large numbers.
  const bool via_put = forward_intrinsic > 0.0;
  const double target = via_put ? price - forward_intrinsic : price;
  auto objective = [&](double sigma) {
    probe.sigma = sigma;
    const auto legs = bs_legs(probe);
    return (via_put ? legs.put : legs.call) - target;
  };
  constexpr double kLo = 1e-6;
  constexpr double kHi = 5.0;
  const double f_lo = objective(kLo);
  const double f_hi = objective(kHi);
  if (f_lo == 0.0) return kLo;
  if (f_hi == 0.0) return kHi;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw Error(ErrorKind::NoConvergence, fmt::format("price {} not bracketed by sigma in [{}, {}]", price, kLo, kHi));
  }
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(objective, kLo, kHi, f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(52), max_iter);
  const double fa = std::abs(objective(a));
  const double fb = std::abs(objective(b));
  const double sigma = fa <= fb ? a : b;
  if (std::min(fa, fb) > 1e-8) {
    throw Error(ErrorKind::NoConvergence, fmt::format("implied vol search stalled at price error {}", std::min(fa, fb)));
  }
  return sigma;
}

double scale_annual_to_horizon(double implied_annual, std::size_t horizon_days, std::size_t trading_days) {
  if (horizon_days < 1 || trading_days < horizon_days) {
    throw Error(ErrorKind::InvalidInputs, "need trading_days >= horizon_days >= 1");
  }
  return implied_annual * std::sqrt(static_cast<double>(horizon_days) / static_cast<double>(trading_days));
}

IvQuotes load_iv_csv(const std::filesystem::path& path, const std::string& date_column,
                     const std::string& value_column) {
  const auto table = csv::read(path);
  const auto c_date = table.column(date_column);
  const auto c_value = table.column(value_column);
  if (!c_date || !c_value) {
    throw Error(ErrorKind::MalformedRow,
                fmt::format("'{}': header lacks '{}' or '{}'", path.string(), date_column, value_column));
  }
  std::vector<std::pair<Date, double>> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = fmt::format("'{}' line {}", path.string(), table.line_numbers[r]);
    if (row.size() <= std::max(*c_date, *c_value)) {
      throw Error(ErrorKind::MalformedRow, where + ": too few fields");
    }
    const auto date = Date::parse(row[*c_date]);
    double value = 0.0;
    if (!date) throw Error(ErrorKind::MalformedRow, where + ": bad date");
    if (!csv::parse_double(row[*c_value], value) || !(value >= 0.0)) {
      throw Error(ErrorKind::MalformedRow, where + ": implied vol must be a non-negative number");
    }
    rows.emplace_back(*date, value);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  IvQuotes quotes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}': duplicate date {}", path.string(), rows[i].first.iso()));
    }
    quotes.dates.push_back(rows[i].first);
    quotes.implied_annual.push_back(rows[i].second);
  }
  if (quotes.dates.empty()) {
    throw Error(ErrorKind::EmptySeries, fmt::format("'{}' has no quotes", path.string()));
  }
  return quotes;
}

std::string iv_csv(const IvQuotes& quotes) {
  std::string out = "date,implied_annual\n";
  for (std::size_t i = 0; i < quotes.dates.size(); ++i) {
    out += fmt::format("{},{}\n", quotes.dates[i].iso(), csv::format_double(quotes.implied_annual[i]));
  }
  return out;
}

IvSeries IvSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > dates.size()) {
    throw Error(ErrorKind::InvalidInputs, "IV slice out of range");
  }
  auto cut = [&](const auto& v) {
    using V = std::decay_t<decltype(v)>;
    return V(v.begin() + static_cast<std::ptrdiff_t>(first), v.begin() + static_cast<std::ptrdiff_t>(first + count));
  };
  IvSeries out;
  out.dates = cut(dates);
  out.implied_annual = cut(implied_annual);
  out.realized_lag = realized_lag.empty() ? std::vector<double>{} : cut(realized_lag);
  return out;
}

IvDataset build_iv_dataset(const ReturnSeries& returns, const IvQuotes& quotes, std::size_t horizon,
                           std::size_t proxy_window) {
  if (horizon < 2 || proxy_window < 2) {
    throw Error(ErrorKind::InvalidInputs, "horizon and proxy window must be at least 2");
  }
  const auto forward = realized_vol(returns, horizon);
  const auto trailing = realized_vol(returns, proxy_window);
  std::map<Date, double> by_date;
  for (std::size_t i = 0; i < quotes.dates.size(); ++i) {
    by_date.emplace(quotes.dates[i], quotes.implied_annual[i]);
  }
  IvDataset data;
  const auto n = returns.size();
  for (std::size_t t = proxy_window - 1; t + horizon < n; ++t) {
    const auto it = by_date.find(returns.dates[t]);
    if (it == by_date.end()) {
      continue;
    }
    data.regressors.dates.push_back(returns.dates[t]);
    data.regressors.implied_annual.push_back(it->second);
    data.regressors.realized_lag.push_back(trailing.proxy[t + 1 - proxy_window]);
    data.target.push_back(forward.proxy[t + 1]);
    data.origin_index.push_back(t);
  }
  return data;
}

OlsResult ols(const std::vector<std::vector<double>>& columns, std::span<const double> y) {
  const auto n = y.size();
  const auto k = columns.size() + 1;
  for (const auto& c : columns) {
    if (c.size() != n) {
      throw Error(ErrorKind::MisalignedSeries, "regressor and target lengths differ");
    }
  }
  if (n < k) {
    throw Error(ErrorKind::TooFewObservations, fmt::format("{} observations for {} coefficients", n, k));
  }
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < cols; ++j) {
      x(i, j) = columns[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i)];
    }
    target(i) = y[static_cast<std::size_t>(i)];
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < cols) {
    throw Error(ErrorKind::SingularDesign, fmt::format("design has rank {} < {}", qr.rank(), cols));
  }
  const Eigen::VectorXd beta = qr.solve(target);
  const Eigen::VectorXd resid = target - x * beta;

  OlsResult out;
  out.n_obs = n;
  out.df_resid = n - k;
  out.coef.assign(beta.data(), beta.data() + cols);
  out.residuals.assign(resid.data(), resid.data() + rows);

  const double ssr = resid.squaredNorm();
  const double mean = target.mean();
  const double tss = (target.array() - mean).square().sum();
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  out.r_squared = tss > 0.0 ? std::clamp(1.0 - ssr / tss, 0.0, 1.0) : 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.adj_r_squared = n > k ? 1.0 - (1.0 - out.r_squared) * (nd - 1.0) / (nd - kd) : nan;
  out.loglik = -0.5 * nd * (std::log(2.0 * std::numbers::pi) + std::log(ssr / nd) + 1.0);
  out.aic = 2.0 * kd - 2.0 * out.loglik;
  out.bic = kd * std::log(nd) - 2.0 * out.loglik;

  out.std_errors.assign(k, nan);
  out.t_stats.assign(k, nan);
  out.p_values.assign(k, nan);
  out.f_stat = nan;
  out.f_pvalue = nan;
  if (n > k) {
    const double sigma2 = ssr / (nd - kd);
    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::MatrixXd cov = sigma2 * xtx.ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    const boost::math::students_t t_dist(nd - kd);
    for (std::size_t j = 0; j < k; ++j) {
      const double var = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
      if (var > 0.0) {
        out.std_errors[j] = std::sqrt(var);
        out.t_stats[j] = out.coef[j] / out.std_errors[j];
        out.p_values[j] = 2.0 * boost::math::cdf(boost::math::complement(t_dist, std::abs(out.t_stats[j])));
      }
    }
    if (k > 1 && out.r_squared < 1.0) {
      out.f_stat = (out.r_squared / (kd - 1.0)) / ((1.0 - out.r_squared) / (nd - kd));
      const boost::math::fisher_f f_dist(kd - 1.0, nd - kd);
      out.f_pvalue = boost::math::cdf(boost::math::complement(f_dist, out.f_stat));
    }
  }
  return out;
}

namespace {

double convert_implied(double implied_annual, IvUnits units, std::size_t trading_days) {
  return units == IvUnits::PerDay ? implied_annual / std::sqrt(static_cast<double>(trading_days)) : implied_annual;
}

}  // namespace

std::string IvRegressionModel::label() const { return variant == IvVariant::Model1 ? "IV-Model1" : "IV-Model2"; }

IvRegressionModel fit_iv_regression(IvVariant variant, std::span<const double> target, const IvSeries& regressors,
                                    std::size_t train_len, IvUnits units, std::size_t trading_days) {
  if (target.size() != regressors.size() || regressors.implied_annual.size() != regressors.size() ||
      (variant == IvVariant::Model2 && regressors.realized_lag.size() != regressors.size())) {
    throw Error(ErrorKind::MisalignedSeries, "IV regressors and target are not aligned");
  }
  if (train_len > regressors.size()) {
    throw Error(ErrorKind::TooFewObservations,
                fmt::format("training length {} exceeds {} aligned rows", train_len, regressors.size()));
  }
  if (trading_days == 0) {
    throw Error(ErrorKind::InvalidInputs, "trading_days must be positive");
  }
  std::vector<std::vector<double>> columns(1);
  for (std::size_t i = 0; i < train_len; ++i) {
    columns[0].push_back(convert_implied(regressors.implied_annual[i], units, trading_days));
  }
  if (variant == IvVariant::Model2) {
    columns.emplace_back(regressors.realized_lag.begin(),
                         regressors.realized_lag.begin() + static_cast<std::ptrdiff_t>(train_len));
  }

  IvRegressionModel model;
  model.variant = variant;
  model.units = units;
  model.trading_days = trading_days;
  model.ols = ols(columns, target.first(train_len));
  model.beta0 = model.ols.coef[0];
  model.beta1 = model.ols.coef[1];
  if (variant == IvVariant::Model2) {
    model.beta2 = model.ols.coef[2];
  }
  return model;
}

IvPrediction predict_iv_regression(const IvRegressionModel& model, const IvSeries& regressors,
                                   std::span<const double> realized) {
  if (realized.size() != regressors.size() || regressors.implied_annual.size() != regressors.size() ||
      (model.variant == IvVariant::Model2 && regressors.realized_lag.size() != regressors.size())) {
    throw Error(ErrorKind::MisalignedSeries, "IV test regressors and realized targets are not aligned");
  }
  IvPrediction out;
  out.series.model_label = model.label();
  for (std::size_t i = 0; i < regressors.size(); ++i) {
    double value = model.beta0 + model.beta1 * convert_implied(regressors.implied_annual[i], model.units, model.trading_days);
    if (model.beta2) {
      value += *model.beta2 * regressors.realized_lag[i];
    }
    if (value < 0.0) {
      value = 0.0;
      ++out.floored;
    }
    out.series.push_back(regressors.dates[i], value, realized[i]);
  }
  return out;
}

std::string regression_report(const IvRegressionModel& model, const std::string& dep_variable) {
  const auto& r = model.ols;
  const std::string rule(78, '=');
  const std::string thin(78, '-');
  const auto k = r.coef.size();
  std::string out;
  out += rule + "\n";
  out += fmt::format("{:^78}\n", "OLS Regression Results");
  out += rule + "\n";
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.3f}\n", "Dep. Variable:", dep_variable, "R-squared:", r.r_squared);
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.3f}\n", "Model:", "OLS", "Adj. R-squared:", r.adj_r_squared);
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.4g}\n", "Method:", "Least Squares", "F-statistic:", r.f_stat);
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.3g}\n", "Variant:", model.label(), "Prob (F-statistic):", r.f_pvalue);
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.2f}\n", "Regressor units:",
                     model.units == IvUnits::PerDay ? "per-day" : "annualized", "Log-Likelihood:", r.loglik);
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.4g}\n", "No. Observations:", r.n_obs, "AIC:", r.aic);
  out += fmt::format("{:<22}{:>16}   {:<22}{:>14.4g}\n", "Df Residuals:", r.df_resid, "BIC:", r.bic);
  out += fmt::format("{:<22}{:>16}\n", "Df Model:", k - 1);
  out += fmt::format("{:<22}{:>16}\n", "Covariance Type:", "nonrobust");
  out += rule + "\n";
  out += fmt::format("{:<12}{:>11}{:>11}{:>11}{:>11}{:>11}{:>11}\n", "", "coef", "std err", "t", "P>|t|", "[0.025",
                     "0.975]");
  out += thin + "\n";
  const double df = static_cast<double>(r.df_resid);
  const double crit = r.df_resid > 0 ? boost::math::quantile(boost::math::students_t(df), 0.975)
                                     : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < k; ++j) {
    const auto name = j == 0 ? std::string("const") : fmt::format("x{}", j);
    out += fmt::format("{:<12}{:>11.4f}{:>11.3f}{:>11.3f}{:>11.3f}{:>11.3f}{:>11.3f}\n", name, r.coef[j],
                       r.std_errors[j], r.t_stats[j], r.p_values[j], r.coef[j] - crit * r.std_errors[j],
                       r.coef[j] + crit * r.std_errors[j]);
  }
  out += rule + "\n";
  return out;
}

}  // namespace fxvol
