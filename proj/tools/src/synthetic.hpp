#pragma once

#include <fxvol/date.hpp>
#include <fxvol/ivmodel.hpp>
#include <fxvol/marketdata.hpp>

#include <cstddef>
#include <cstdint>

namespace fxvol::pipeline {

/// Demonstration dataset: a GJR(1,1,1) path with Student-t(6) innovations and
/// an implied-vol series built from the true forward volatility plus noise.
struct SyntheticOptions {
  std::size_t n_returns = 1300;
  std::uint64_t seed = 20230615;
  double first_close = 1.30;
  Date first_date{2018, 6, 15};
  std::size_t horizon = 20;         // forward window the IV quote refers to
  std::size_t trading_days = 252;
  double iv_noise = 0.10;           // relative noise on each quote
};

struct SyntheticData {
  PriceSeries prices;
  IvQuotes iv;
};

SyntheticData make_synthetic(const SyntheticOptions& options = {});

}  // namespace fxvol::pipeline
