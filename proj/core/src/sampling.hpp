#pragma once

#include "fxvol/garch.hpp"

#include <cmath>
#include <optional>
#include <random>

namespace fxvol::detail {

/// Draws unit-variance innovations from the model's distribution.
class InnovationSampler {
 public:
  InnovationSampler(Distribution dist, std::optional<double> nu, std::uint64_t seed)
      : dist_(dist), engine_(seed), t_(dist == Distribution::StudentT ? *nu : 5.0) {
    if (dist == Distribution::StudentT) {
      scale_ = std::sqrt((*nu - 2.0) / *nu);
    }
  }

  double operator()() {
    if (dist_ == Distribution::Normal) {
      return normal_(engine_);
    }
    return scale_ * t_(engine_);
  }

 private:
  Distribution dist_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::student_t_distribution<double> t_;
  double scale_ = 1.0;
};

}  // namespace fxvol::detail
