#include "fxvol/forecaster.hpp"

#include "fxvol/csv.hpp"
#include "fxvol/error.hpp"
#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

namespace fxvol {

ForecastMethod ForecastMethod::rolling(std::size_t window, std::size_t horizon) {
  ForecastMethod m;
  m.mode = WindowMode::Rolling;
  m.window = window;
  m.horizon = horizon;
  m.warm_start = true;
  return m;
}

ForecastMethod ForecastMethod::expanding(std::size_t horizon) {
  ForecastMethod m;
  m.mode = WindowMode::Expanding;
  m.horizon = horizon;
  m.warm_start = false;
  return m;
}

void ForecastMethod::validate() const {
  if (mode == WindowMode::Rolling && window < 50) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("rolling window {} below the minimum of 50", window));
  }
  if (horizon < 1 || refit_every < 1) {
    throw Error(ErrorKind::InvalidConfig, "horizon and refit_every must be at least 1");
  }
}

std::string ForecastMethod::label() const { return mode == WindowMode::Rolling ? "rolling" : "expanding"; }

void ForecastSeries::push_back(Date date, double predicted_value, double realized_value) {
  dates.push_back(date);
  predicted.push_back(predicted_value);
  realized.push_back(realized_value);
}

namespace {

std::vector<double> analytic_path(const GarchSpec& spec, const GarchParams& params, const LagState& state,
                                  std::size_t horizon) {
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  const auto p = static_cast<std::size_t>(spec.p);
  const auto o = static_cast<std::size_t>(spec.o);
  const auto q = static_cast<std::size_t>(spec.q);
  // Known squared residuals for the lags, then their expectations.
  std::vector<double> e2(lags + horizon);
  std::vector<double> neg_e2(lags + horizon);
  std::vector<double> var(lags + horizon);
  for (std::size_t i = 0; i < lags; ++i) {
    const double e = state.residuals[state.residuals.size() - lags + i];
    e2[i] = e * e;
    neg_e2[i] = e < 0.0 ? e * e : 0.0;
    var[i] = state.variances[state.variances.size() - lags + i];
  }
  std::vector<double> out(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const auto t = lags + h;
    double v = params.omega;
    for (std::size_t i = 1; i <= p; ++i) v += params.alpha[i - 1] * e2[t - i];
    for (std::size_t i = 1; i <= o; ++i) v += params.gamma[i - 1] * neg_e2[t - i];
    for (std::size_t j = 1; j <= q; ++j) v += params.beta[j - 1] * var[t - j];
    v = std::max(v, kVarianceFloor);
    var[t] = v;
    e2[t] = v;
    neg_e2[t] = 0.5 * v;  // symmetric innovations
    out[h] = v;
  }
  return out;
}

std::vector<double> simulated_path(const GarchSpec& spec, const GarchParams& params, const LagState& state,
                                   std::size_t horizon, const MonteCarloOptions& mc) {
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  const double abs_z_mean = spec.family == Family::Egarch ? expected_abs_innovation(spec.dist, params.nu) : 0.0;
  const auto paths = std::max<std::size_t>(mc.paths, 1);

  std::vector<double> eps(lags + horizon);
  std::vector<double> var(lags + horizon);
  for (std::size_t i = 0; i < lags; ++i) {
    eps[i] = state.residuals[state.residuals.size() - lags + i];
    var[i] = state.variances[state.variances.size() - lags + i];
  }
  std::vector<double> draws(horizon);
  std::vector<double> mean(horizon, 0.0);
  detail::InnovationSampler sample(spec.dist, params.nu, mc.seed);
  std::size_t clamps = 0;
  for (std::size_t path = 0; path < paths; ++path) {
    const bool mirror = mc.antithetic && (path % 2 == 1);
    if (!mirror) {
      for (auto& z : draws) z = sample();
    }
    for (std::size_t h = 0; h < horizon; ++h) {
      const auto t = lags + h;
      var[t] = detail::variance_step(spec, params, abs_z_mean, eps, var, t, clamps);
      const double z = mirror ? -draws[h] : draws[h];
      eps[t] = std::sqrt(var[t]) * z;
      // Running mean keeps identical paths bit-exact.
      mean[h] += (var[t] - mean[h]) / static_cast<double>(path + 1);
    }
  }
  return mean;
}

}  // namespace

std::vector<double> variance_path_forecast(const GarchSpec& spec, const GarchParams& params, const LagState& state,
                                           std::size_t horizon, const MonteCarloOptions& mc) {
  validate_params(spec, params);
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  if (state.residuals.size() < lags || state.variances.size() < lags) {
    throw Error(ErrorKind::InvalidState,
                fmt::format("{} forecast needs {} trailing lags, state has {}", spec.label(), lags,
                            std::min(state.residuals.size(), state.variances.size())));
  }
  for (std::size_t i = state.variances.size() - lags; i < state.variances.size(); ++i) {
    if (!(state.variances[i] > 0.0)) {
      throw Error(ErrorKind::InvalidState, "trailing variances must be positive");
    }
  }
  if (horizon == 0) {
    return {};
  }
  if (spec.family == Family::Garch || spec.family == Family::Gjr) {
    return analytic_path(spec, params, state, horizon);
  }
  return simulated_path(spec, params, state, horizon, mc);
}

double horizon_vol(std::span<const double> path, std::size_t horizon) {
  if (horizon == 0 || path.size() < horizon) {
    throw Error(ErrorKind::InvalidInputs, fmt::format("path of {} steps cannot cover horizon {}", path.size(), horizon));
  }
  double sum = 0.0;
  for (std::size_t h = 0; h < horizon; ++h) sum += path[h];
  return std::sqrt(std::max(sum / static_cast<double>(horizon), 0.0));
}

std::vector<std::size_t> forecast_origins(std::size_t total, std::size_t split_index, std::size_t horizon,
                                          std::size_t refit_every) {
  std::vector<std::size_t> origins;
  if (refit_every == 0 || total < horizon + 1) {
    return origins;
  }
  for (std::size_t t = split_index; t + horizon < total; t += refit_every) {
    origins.push_back(t);
  }
  return origins;
}

namespace {

void check_split(const ReturnSeries& returns, const SampleSplit& split, std::size_t horizon) {
  if (split.in_sample.size() + split.out_of_sample.size() != returns.size() ||
      split.split_index != split.in_sample.size()) {
    throw Error(ErrorKind::MisalignedSeries, "sample split does not partition the return series");
  }
  if (split.out_of_sample.size() < horizon + 1) {
    throw Error(ErrorKind::TooFewObservations,
                fmt::format("out-of-sample length {} cannot host a {}-day horizon", split.out_of_sample.size(), horizon));
  }
}

std::string sanitize(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

BacktestResult backtest(const GarchSpec& spec, const ReturnSeries& returns, const SampleSplit& split,
                        const ForecastMethod& method, const OptimizerConfig& config, const MonteCarloOptions& mc) {
  spec.validate();
  method.validate();
  check_split(returns, split, method.horizon);

  const auto proxy = realized_vol(returns, method.horizon);
  const auto origins = forecast_origins(returns.size(), split.split_index, method.horizon, method.refit_every);
  const auto lags = static_cast<std::size_t>(spec.max_lag());

  BacktestResult result;
  result.series.model_label = spec.label();
  result.origin_count = origins.size();
  std::optional<GarchParams> previous;
  const std::span<const double> all(returns.returns);
  OptimizerConfig fit_config = config;
  fit_config.std_errors = false;

  for (const auto t : origins) {
    const Date date = returns.dates[t];
    std::size_t start = 0;
    if (method.mode == WindowMode::Rolling) {
      if (t + 1 < method.window) {
        if (!method.truncate_short_windows) {
          result.skipped.push_back({date, fmt::format("rolling window {} exceeds {} available returns", method.window, t + 1)});
          continue;
        }
      } else {
        start = t + 1 - method.window;
      }
    }
    const auto sample = all.subspan(start, t + 1 - start);
    try {
      const auto fitted = fit(spec, sample, fit_config, method.warm_start ? previous : std::nullopt);
      const bool simulated = spec.family == Family::Egarch || spec.family == Family::Tgarch;
      if (method.skip_explosive_simulations && simulated && !fitted.stationary) {
        result.skipped.push_back({date, "fitted model is not stationary"});
        continue;
      }
      const auto innov = variance_filter(spec, fitted.params, sample);
      MonteCarloOptions origin_mc = mc;
      origin_mc.seed = mc.seed + t;
      const auto path = variance_path_forecast(spec, fitted.params, innov.tail(lags), method.horizon, origin_mc);
      const double predicted = horizon_vol(path, method.horizon);
      if (!std::isfinite(predicted)) {
        result.skipped.push_back({date, "non-finite forecast"});
        continue;
      }
      result.series.push_back(date, predicted, proxy.proxy[t + 1]);
      previous = fitted.params;
    } catch (const Error& e) {
      result.skipped.push_back({date, sanitize(e.what())});
    }
  }
  if (result.series.size() == 0) {
    throw Error(ErrorKind::NoValidOrigins,
                fmt::format("{} {}: all {} origins failed", spec.label(), method.label(), origins.size()));
  }
  return result;
}

std::string ewma_label(const EwmaConfig& config) { return fmt::format("EWMA({})", config.lambda); }

BacktestResult ewma_backtest(const ReturnSeries& returns, const SampleSplit& split, const EwmaConfig& config,
                             std::size_t horizon, std::size_t refit_every) {
  if (horizon < 1 || refit_every < 1) {
    throw Error(ErrorKind::InvalidConfig, "horizon and refit_every must be at least 1");
  }
  check_split(returns, split, horizon);
  const auto variance = ewma_filter(returns, config);
  const auto proxy = realized_vol(returns, horizon);
  const auto origins = forecast_origins(returns.size(), split.split_index, horizon, refit_every);

  BacktestResult result;
  result.series.model_label = ewma_label(config);
  result.origin_count = origins.size();
  for (const auto t : origins) {
    const EwmaState state{variance[t + 1], returns.dates[t]};
    result.series.push_back(state.last_date, ewma_forecast(state, horizon), proxy.proxy[t + 1]);
  }
  if (result.series.size() == 0) {
    throw Error(ErrorKind::NoValidOrigins, "EWMA backtest has no origins");
  }
  return result;
}

std::string forecast_csv(const ForecastSeries& series) {
  std::string out = "origin_date,model_label,predicted,realized\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", series.dates[i].iso(), csv::quote(series.model_label),
                       csv::format_double(series.predicted[i]), csv::format_double(series.realized[i]));
  }
  return out;
}

ForecastSeries read_forecast_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto c_date = table.column("origin_date");
  const auto c_label = table.column("model_label");
  const auto c_pred = table.column("predicted");
  const auto c_real = table.column("realized");
  if (!c_date || !c_label || !c_pred || !c_real) {
    throw Error(ErrorKind::MalformedRow, fmt::format("'{}' is not a forecast file", path.string()));
  }
  ForecastSeries series;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto bad = [&](std::string_view what) {
      return Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: {}", path.string(), table.line_numbers[r], what));
    };
    if (row.size() < table.header.size()) throw bad("too few fields");
    const auto date = Date::parse(row[*c_date]);
    double pred = 0.0;
    double real = 0.0;
    if (!date) throw bad("bad date");
    if (!csv::parse_double(row[*c_pred], pred) || !csv::parse_double(row[*c_real], real)) throw bad("bad number");
    if (series.model_label.empty()) {
      series.model_label = row[*c_label];
    } else if (series.model_label != row[*c_label]) {
      throw bad("mixed model labels");
    }
    series.push_back(*date, pred, real);
  }
  return series;
}

std::string skipped_csv(const std::vector<SkippedOrigin>& skipped) {
  std::string out = "origin_date,reason\n";
  for (const auto& s : skipped) {
    out += fmt::format("{},{}\n", s.date.iso(), sanitize(s.reason));
  }
  return out;
}

std::vector<SkippedOrigin> read_skipped_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  std::vector<SkippedOrigin> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto date = row.empty() ? std::nullopt : Date::parse(row[0]);
    if (!date) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: bad date", path.string(), table.line_numbers[r]));
    }
    out.push_back({*date, row.size() > 1 ? row[1] : std::string{}});
  }
  return out;
}

}  // namespace fxvol
