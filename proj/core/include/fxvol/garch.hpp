#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fxvol {

enum class Family { Garch, Egarch, Gjr, Tgarch };
enum class Distribution { Normal, StudentT };
enum class MeanModel { Constant, Zero };

std::string_view to_string(Family family) noexcept;
std::string_view to_string(Distribution dist) noexcept;
std::optional<Family> parse_family(std::string_view text);
std::optional<Distribution> parse_distribution(std::string_view text);

/// Model family, lag orders and innovation law.
///
/// p counts alpha (ARCH) lags, o counts gamma (asymmetry) lags and q counts
/// beta (GARCH) lags. Plain GARCH requires o = 0; every family requires
/// p >= 1 and o <= p.
struct GarchSpec {
  Family family = Family::Garch;
  int p = 1;
  int o = 0;
  int q = 1;
  Distribution dist = Distribution::Normal;
  MeanModel mean = MeanModel::Constant;

  void validate() const;
  [[nodiscard]] int max_lag() const;
  [[nodiscard]] std::size_t num_params() const;
  /// e.g. "GARCH(1,1)-t", "GJR(2,1,2)-normal"
  [[nodiscard]] std::string label() const;
  [[nodiscard]] std::vector<std::string> param_names() const;

  friend bool operator==(const GarchSpec&, const GarchSpec&) = default;
};

/// Parses labels produced by GarchSpec::label().
std::optional<GarchSpec> parse_spec_label(std::string_view label);

/// Coefficients in natural units. omega is a variance for GARCH/GJR, a log
/// variance for EGARCH and a volatility for TGARCH.
struct GarchParams {
  double mu = 0.0;
  double omega = 0.0;
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::optional<double> nu;

  /// Flattened as mu (if constant mean), omega, alpha.., gamma.., beta.., nu.
  [[nodiscard]] std::vector<double> to_vector(const GarchSpec& spec) const;
  static GarchParams from_vector(const GarchSpec& spec, std::span<const double> values);
};

/// Throws Error(InvalidParams) naming the violated constraint.
void validate_params(const GarchSpec& spec, const GarchParams& params);

/// Trailing residuals and conditional variances, oldest first. Used both as
/// pre-sample lags for a filter and as the starting point of a forecast.
struct LagState {
  std::vector<double> residuals;
  std::vector<double> variances;
};

struct Innovations {
  std::vector<double> residuals;
  std::vector<double> variances;
  std::vector<double> standardized;
  std::size_t clamp_events = 0;

  /// Last `lags` residual/variance pairs. Throws InvalidState if too short.
  [[nodiscard]] LagState tail(std::size_t lags) const;
};

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kLogVarianceCeiling = 700.0;

/// Conditional variance recursion with the default seeding: pre-sample
/// residuals are zero and pre-sample variances equal the sample variance of
/// the residuals.
Innovations variance_filter(const GarchSpec& spec, const GarchParams& params,
                            std::span<const double> returns);

/// Same recursion seeded from explicit pre-sample lags. `presample` must hold
/// at least spec.max_lag() entries in each sequence.
Innovations variance_filter(const GarchSpec& spec, const GarchParams& params,
                            std::span<const double> returns, const LagState& presample);

LagState default_presample(const GarchSpec& spec, const GarchParams& params,
                           std::span<const double> returns);

/// Sum of per-observation log densities. Throws NonFiniteLikelihood when the
/// result is not finite.
double log_likelihood(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns);

/// Log density of one residual given its conditional variance.
double log_density(Distribution dist, std::optional<double> nu, double residual, double variance);

/// E|z| for a unit-variance innovation.
double expected_abs_innovation(Distribution dist, std::optional<double> nu = std::nullopt);

/// Sum(alpha) + Sum(beta) (+ half Sum(gamma) for GJR). Undefined for EGARCH
/// and TGARCH, where nullopt is returned.
std::optional<double> persistence(const GarchSpec& spec, const GarchParams& params);

/// Mean-reversion check per family: GARCH/GJR persistence < 1, EGARCH beta
/// lag polynomial with all roots outside the unit circle, TGARCH Sum(beta) + E|z| Sum(alpha) < 1 on
/// the volatility scale.
bool is_stationary(const GarchSpec& spec, const GarchParams& params);

/// Long-run variance for GARCH/GJR. nullopt for EGARCH/TGARCH; throws
/// NonStationary when persistence >= 1.
std::optional<double> unconditional_variance(const GarchSpec& spec, const GarchParams& params);

namespace detail {

/// ln Gamma((nu + 1) / 2) - ln Gamma(nu / 2), accurate for large nu.
double t_log_gamma_ratio(double nu);

/// Computes the conditional variance at position t of the extended arrays
/// given everything before t. Applies the variance floor and log ceiling,
/// incrementing `clamps` when either triggers.
double variance_step(const GarchSpec& spec, const GarchParams& params, double abs_z_mean,
                     std::span<const double> residuals, std::span<const double> variances, std::size_t t,
                     std::size_t& clamps);

}  // namespace detail

}  // namespace fxvol
