#include "synthetic.hpp"

#include <fxvol/error.hpp>
#include <fxvol/garch.hpp>
#include <fxvol/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace fxvol::pipeline {

SyntheticData make_synthetic(const SyntheticOptions& options) {
  if (options.n_returns < options.horizon + 2 || options.horizon == 0) {
    throw Error(ErrorKind::InvalidInputs, "synthetic series too short for the IV horizon");
  }
  GarchSpec spec;
  spec.family = Family::Gjr;
  spec.p = 1;
  spec.o = 1;
  spec.q = 1;
  spec.dist = Distribution::StudentT;
  GarchParams params;
  params.mu = 0.0;
  // Unconditional daily std of about 0.46%, the scale of a major cross such as
  // EUR/GBP; persistence alpha + gamma/2 + beta = 0.98.
  params.omega = 0.0042;
  params.alpha = {0.02};
  params.gamma = {0.12};
  params.beta = {0.90};
  params.nu = 6.0;

  const auto path = simulate(spec, params, options.n_returns, options.seed);

  SyntheticData data;
  data.prices = prices_from_returns(path.returns, options.first_close, options.first_date);

  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = path.returns.size();
  const double annualise = std::sqrt(static_cast<double>(options.trading_days));
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const auto last = std::min(n, t + 1 + options.horizon);
    double sum = 0.0;
    for (std::size_t k = t + 1; k < last; ++k) sum += path.variances[k];
    const double forward = std::sqrt(sum / static_cast<double>(last - t - 1));
    const double quote = forward * annualise * (1.0 + options.iv_noise * noise(rng));
    data.iv.dates.push_back(data.prices.dates[t + 1]);
    data.iv.implied_annual.push_back(std::max(quote, 0.0));
  }
  return data;
}

}  // namespace fxvol::pipeline
