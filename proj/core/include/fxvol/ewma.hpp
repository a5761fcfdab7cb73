#pragma once

#include "fxvol/date.hpp"
#include "fxvol/marketdata.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fxvol {

enum class EwmaInit {
  FirstSquared,    // sigma2_0 = r_0^2
  MeanOfFirstK,    // sigma2_0 = mean of the first k squared returns
  Fixed,           // sigma2_0 = EwmaConfig::initial_variance
};

struct EwmaConfig {
  double lambda = 0.97;
  EwmaInit init = EwmaInit::MeanOfFirstK;
  std::size_t init_k = 20;
  double initial_variance = 0.0;

  void validate() const;
};

struct EwmaState {
  double variance = 0.0;
  Date last_date;
};

/// Returns n + 1 variances: element t is the variance for day t given returns
/// 0..t-1, so the last element is the one-step-ahead forecast after the final
/// return.
std::vector<double> ewma_filter(std::span<const double> returns, const EwmaConfig& config);
inline std::vector<double> ewma_filter(const ReturnSeries& returns, const EwmaConfig& config) {
  return ewma_filter(returns.returns, config);
}

/// Flat forecast: daily volatility (%) for every horizon.
double ewma_forecast(const EwmaState& state, std::size_t horizon);

}  // namespace fxvol
