#include "fxvol/ewma.hpp"

#include "fxvol/error.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace fxvol {

void EwmaConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw Error(ErrorKind::InvalidParams, fmt::format("EWMA lambda {} outside (0, 1)", lambda));
  }
  if (init == EwmaInit::MeanOfFirstK && init_k == 0) {
    throw Error(ErrorKind::InvalidParams, "EWMA init_k must be positive");
  }
  if (init == EwmaInit::Fixed && !(initial_variance >= 0.0)) {
    throw Error(ErrorKind::InvalidParams, "EWMA initial variance must be non-negative");
  }
}

std::vector<double> ewma_filter(std::span<const double> returns, const EwmaConfig& config) {
  config.validate();
  if (returns.size() < 2) {
    throw Error(ErrorKind::EmptySeries, "EWMA needs at least two returns");
  }

  double initial = 0.0;
  switch (config.init) {
    case EwmaInit::FirstSquared:
      initial = returns[0] * returns[0];
      break;
    case EwmaInit::MeanOfFirstK: {
      const auto k = std::min(config.init_k, returns.size());
      for (std::size_t i = 0; i < k; ++i) {
        initial += returns[i] * returns[i];
      }
      initial /= static_cast<double>(k);
      break;
    }
    case EwmaInit::Fixed:
      initial = config.initial_variance;
      break;
  }

  std::vector<double> variance(returns.size() + 1);
  variance[0] = initial;
  const double lambda = config.lambda;
  for (std::size_t t = 1; t <= returns.size(); ++t) {
    const double r = returns[t - 1];
    variance[t] = lambda * variance[t - 1] + (1.0 - lambda) * r * r;
  }
  return variance;
}

double ewma_forecast(const EwmaState& state, std::size_t horizon) {
  if (horizon == 0) {
    throw Error(ErrorKind::InvalidInputs, "forecast horizon must be at least 1");
  }
  return std::sqrt(std::max(state.variance, 0.0));
}

}  // namespace fxvol
