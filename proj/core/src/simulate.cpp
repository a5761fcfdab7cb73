#include "fxvol/simulate.hpp"

#include "fxvol/error.hpp"
#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fxvol {

namespace {

double starting_variance(const GarchSpec& spec, const GarchParams& params) {
  const double beta_sum = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
  switch (spec.family) {
    case Family::Garch:
    case Family::Gjr: {
      const auto pers = persistence(spec, params);
      if (pers && *pers < 1.0) {
        return params.omega / (1.0 - *pers);
      }
      return params.omega * 100.0;
    }
    case Family::Egarch:
      return std::abs(1.0 - beta_sum) > 1e-6 ? std::exp(params.omega / (1.0 - beta_sum)) : 1.0;
    case Family::Tgarch: {
      const double drift = 1.0 - beta_sum -
                           std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0) *
                               expected_abs_innovation(spec.dist, params.nu);
      const double sigma = drift > 1e-6 ? params.omega / drift : params.omega * 10.0;
      return sigma * sigma;
    }
  }
  return 1.0;
}

}  // namespace

SimulatedPath simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n, std::uint64_t seed,
                       std::size_t burn_in) {
  validate_params(spec, params);
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  const double mu = spec.mean == MeanModel::Constant ? params.mu : 0.0;
  const double abs_z_mean = spec.family == Family::Egarch ? expected_abs_innovation(spec.dist, params.nu) : 0.0;
  const auto total = lags + burn_in + n;

  std::vector<double> eps(total, 0.0);
  std::vector<double> var(total, std::max(starting_variance(spec, params), kVarianceFloor));
  detail::InnovationSampler draw(spec.dist, params.nu, seed);
  std::size_t clamps = 0;
  for (std::size_t t = lags; t < total; ++t) {
    var[t] = detail::variance_step(spec, params, abs_z_mean, eps, var, t, clamps);
    eps[t] = std::sqrt(var[t]) * draw();
  }

  SimulatedPath path;
  path.returns.reserve(n);
  path.variances.reserve(n);
  for (std::size_t t = lags + burn_in; t < total; ++t) {
    path.returns.push_back(mu + eps[t]);
    path.variances.push_back(var[t]);
  }
  return path;
}

PriceSeries prices_from_returns(const std::vector<double>& returns, double first_close, Date first_date) {
  if (!(first_close > 0.0)) {
    throw Error(ErrorKind::InvalidInputs, "first close must be positive");
  }
  PriceSeries prices;
  Date date = first_date.is_weekend() ? first_date.next_weekday() : first_date;
  prices.dates.push_back(date);
  prices.close.push_back(first_close);
  for (double r : returns) {
    date = date.next_weekday();
    prices.dates.push_back(date);
    prices.close.push_back(prices.close.back() * (1.0 + r / 100.0));
  }
  return prices;
}

}  // namespace fxvol
