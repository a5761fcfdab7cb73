#pragma once

#include "fxvol/garch.hpp"
#include "fxvol/marketdata.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fxvol {

struct OptimizerConfig {
  std::size_t max_iterations = 1000;
  double tolerance = 1e-9;        // relative log-likelihood improvement
  std::size_t restarts = 1;       // extra jittered starts after the first
  std::uint64_t seed = 12345;
  std::size_t min_observations = 50;
  bool std_errors = true;         // false skips the Hessian

  void validate() const;
};

/// Warm-start tail parameters above this are lowered to it before searching.
inline constexpr double kWarmStartNuCap = 100.0;

struct FitResult {
  GarchSpec spec;
  GarchParams params;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::vector<double> std_errors;  // empty unless requested; NaN where the Hessian gives no positive variance
  std::vector<double> t_stats;
  std::size_t n_obs = 0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t clamp_events = 0;
  /// Log-likelihood at each start that produced a finite value.
  std::vector<double> initial_logliks;
  /// Whether the optimum mean-reverts (see is_stationary).
  bool stationary = false;

  [[nodiscard]] std::size_t num_params() const { return spec.num_params(); }
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n);

/// Maps natural parameters onto an unconstrained vector: log for positive
/// GARCH/GJR/TGARCH coefficients, log(alpha + gamma) for GJR asymmetry,
/// atanh for TGARCH asymmetry, log(nu - 2) for the t tail, identity for mu and
/// every EGARCH coefficient. Values below 1e-8 are nudged up before the log.
std::vector<double> transform_to_unconstrained(const GarchSpec& spec, const GarchParams& params);
GarchParams transform_from_unconstrained(const GarchSpec& spec, std::span<const double> values);

/// Starting point: sample-mean mu, persistence near 0.9 and omega chosen to
/// match the sample variance.
GarchParams default_start(const GarchSpec& spec, std::span<const double> returns);

/// Maximum-likelihood fit over `config.restarts + 1` starts. Throws
/// SeriesTooShort or OptimizationFailed.
FitResult fit(const GarchSpec& spec, std::span<const double> returns, const OptimizerConfig& config = {},
              const std::optional<GarchParams>& warm_start = std::nullopt);
inline FitResult fit(const GarchSpec& spec, const ReturnSeries& returns, const OptimizerConfig& config = {},
                     const std::optional<GarchParams>& warm_start = std::nullopt) {
  return fit(spec, returns.returns, config, warm_start);
}

/// Gradient of the mean log-likelihood with respect to the unconstrained
/// coordinates at `params` (central differences).
std::vector<double> unconstrained_gradient(const GarchSpec& spec, const GarchParams& params,
                                           std::span<const double> returns);

}  // namespace fxvol
