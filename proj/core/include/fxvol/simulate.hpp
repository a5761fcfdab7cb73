#pragma once

#include "fxvol/garch.hpp"
#include "fxvol/marketdata.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fxvol {

struct SimulatedPath {
  std::vector<double> returns;    // %
  std::vector<double> variances;  // true conditional variance of each return
};

/// Generates `n` returns from the model after discarding `burn_in` draws.
/// Deterministic for a given seed.
SimulatedPath simulate(const GarchSpec& spec, const GarchParams& params, std::size_t n, std::uint64_t seed,
                       std::size_t burn_in = 500);

/// Closes compounded from percent returns on consecutive weekdays.
PriceSeries prices_from_returns(const std::vector<double>& returns, double first_close, Date first_date);

}  // namespace fxvol
