#include "fxvol/garch.hpp"

#include "fxvol/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace fxvol {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Garch: return "GARCH";
    case Family::Egarch: return "EGARCH";
    case Family::Gjr: return "GJR";
    case Family::Tgarch: return "TGARCH";
  }
  return "?";
}

std::string_view to_string(Distribution dist) noexcept {
  return dist == Distribution::Normal ? "normal" : "t";
}

std::optional<Family> parse_family(std::string_view text) {
  for (auto f : {Family::Garch, Family::Egarch, Family::Gjr, Family::Tgarch}) {
    if (text == to_string(f)) {
      return f;
    }
  }
  if (text == "GJR-GARCH") {
    return Family::Gjr;
  }
  return std::nullopt;
}

std::optional<Distribution> parse_distribution(std::string_view text) {
  if (text == "normal") {
    return Distribution::Normal;
  }
  if (text == "t" || text == "studentt") {
    return Distribution::StudentT;
  }
  return std::nullopt;
}

void GarchSpec::validate() const {
  if (p < 1 || o < 0 || q < 0) {
    throw Error(ErrorKind::InvalidParams, fmt::format("lag orders need p >= 1, o >= 0, q >= 0 (got {},{},{})", p, o, q));
  }
  if (o > p) {
    throw Error(ErrorKind::InvalidParams, fmt::format("asymmetry order o={} exceeds p={}", o, p));
  }
  if (family == Family::Garch && o != 0) {
    throw Error(ErrorKind::InvalidParams, "plain GARCH takes no asymmetry terms (o must be 0)");
  }
}

int GarchSpec::max_lag() const { return std::max({p, o, q}); }

std::size_t GarchSpec::num_params() const {
  std::size_t k = 1 + static_cast<std::size_t>(p + o + q);
  if (mean == MeanModel::Constant) {
    ++k;
  }
  if (dist == Distribution::StudentT) {
    ++k;
  }
  return k;
}

std::string GarchSpec::label() const {
  std::string orders = family == Family::Garch ? fmt::format("{},{}", p, q) : fmt::format("{},{},{}", p, o, q);
  std::string out = fmt::format("{}({})-{}", to_string(family), orders, to_string(dist));
  if (mean == MeanModel::Zero) {
    out += "-zeromean";
  }
  return out;
}

std::vector<std::string> GarchSpec::param_names() const {
  std::vector<std::string> names;
  if (mean == MeanModel::Constant) {
    names.emplace_back("mu");
  }
  names.emplace_back("omega");
  for (int i = 1; i <= p; ++i) names.push_back(fmt::format("alpha[{}]", i));
  for (int i = 1; i <= o; ++i) names.push_back(fmt::format("gamma[{}]", i));
  for (int i = 1; i <= q; ++i) names.push_back(fmt::format("beta[{}]", i));
  if (dist == Distribution::StudentT) {
    names.emplace_back("nu");
  }
  return names;
}

std::optional<GarchSpec> parse_spec_label(std::string_view label) {
  const auto open = label.find('(');
  const auto close = label.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
      close + 1 >= label.size() || label[close + 1] != '-') {
    return std::nullopt;
  }
  GarchSpec spec;
  const auto family = parse_family(label.substr(0, open));
  if (!family) {
    return std::nullopt;
  }
  spec.family = *family;

  std::vector<int> orders;
  auto body = label.substr(open + 1, close - open - 1);
  while (!body.empty()) {
    const auto comma = body.find(',');
    const auto token = body.substr(0, comma);
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      return std::nullopt;
    }
    orders.push_back(value);
    if (comma == std::string_view::npos) {
      break;
    }
    body.remove_prefix(comma + 1);
  }
  if (spec.family == Family::Garch && orders.size() == 2) {
    spec.p = orders[0];
    spec.o = 0;
    spec.q = orders[1];
  } else if (spec.family != Family::Garch && orders.size() == 3) {
    spec.p = orders[0];
    spec.o = orders[1];
    spec.q = orders[2];
  } else {
    return std::nullopt;
  }

  auto rest = label.substr(close + 2);
  constexpr std::string_view kZeroMean = "-zeromean";
  if (rest.size() > kZeroMean.size() && rest.ends_with(kZeroMean)) {
    spec.mean = MeanModel::Zero;
    rest.remove_suffix(kZeroMean.size());
  }
  const auto dist = parse_distribution(rest);
  if (!dist) {
    return std::nullopt;
  }
  spec.dist = *dist;
  try {
    spec.validate();
  } catch (const Error&) {
    return std::nullopt;
  }
  return spec;
}

std::vector<double> GarchParams::to_vector(const GarchSpec& spec) const {
  std::vector<double> out;
  out.reserve(spec.num_params());
  if (spec.mean == MeanModel::Constant) {
    out.push_back(mu);
  }
  out.push_back(omega);
  out.insert(out.end(), alpha.begin(), alpha.end());
  out.insert(out.end(), gamma.begin(), gamma.end());
  out.insert(out.end(), beta.begin(), beta.end());
  if (spec.dist == Distribution::StudentT) {
    out.push_back(nu.value_or(0.0));
  }
  return out;
}

GarchParams GarchParams::from_vector(const GarchSpec& spec, std::span<const double> values) {
  if (values.size() != spec.num_params()) {
    throw Error(ErrorKind::InvalidParams,
                fmt::format("{} expects {} parameters, got {}", spec.label(), spec.num_params(), values.size()));
  }
  GarchParams params;
  std::size_t i = 0;
  if (spec.mean == MeanModel::Constant) {
    params.mu = values[i++];
  }
  params.omega = values[i++];
  auto take = [&](int count, std::vector<double>& dst) {
    dst.assign(values.begin() + static_cast<std::ptrdiff_t>(i), values.begin() + static_cast<std::ptrdiff_t>(i + count));
    i += static_cast<std::size_t>(count);
  };
  take(spec.p, params.alpha);
  take(spec.o, params.gamma);
  take(spec.q, params.beta);
  if (spec.dist == Distribution::StudentT) {
    params.nu = values[i++];
  }
  return params;
}

void validate_params(const GarchSpec& spec, const GarchParams& params) {
  spec.validate();
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::InvalidParams, fmt::format("{}: {}", spec.label(), what));
  };
  if (params.alpha.size() != static_cast<std::size_t>(spec.p) ||
      params.gamma.size() != static_cast<std::size_t>(spec.o) ||
      params.beta.size() != static_cast<std::size_t>(spec.q)) {
    fail("coefficient counts do not match lag orders");
  }
  const auto all = params.to_vector(spec);
  if (!std::all_of(all.begin(), all.end(), [](double v) { return std::isfinite(v); })) {
    fail("non-finite coefficient");
  }
  if (spec.dist == Distribution::StudentT) {
    if (!params.nu || !(*params.nu > 2.0)) {
      fail("Student-t requires nu > 2");
    }
  } else if (params.nu) {
    fail("nu given for a normal model");
  }
  if (spec.mean == MeanModel::Zero && params.mu != 0.0) {
    fail("zero-mean model with mu != 0");
  }

  switch (spec.family) {
    case Family::Garch:
    case Family::Gjr:
    case Family::Tgarch:
      if (!(params.omega > 0.0)) fail("omega > 0");
      for (double a : params.alpha) {
        if (a < 0.0) fail("alpha >= 0");
      }
      for (double b : params.beta) {
        if (b < 0.0) fail("beta >= 0");
      }
      if (spec.family == Family::Gjr) {
        for (int i = 0; i < spec.o; ++i) {
          if (params.alpha[static_cast<std::size_t>(i)] + params.gamma[static_cast<std::size_t>(i)] < 0.0) {
            fail("alpha + gamma >= 0");
          }
        }
      }
      if (spec.family == Family::Tgarch) {
        for (double g : params.gamma) {
          if (std::abs(g) > 1.0) fail("|gamma| <= 1");
        }
      }
      break;
    case Family::Egarch:
      break;
  }
}

double expected_abs_innovation(Distribution dist, std::optional<double> nu) {
  if (dist == Distribution::Normal) {
    return std::sqrt(2.0 / std::numbers::pi);
  }
  if (!nu || !(*nu > 2.0)) {
    throw Error(ErrorKind::InvalidParams, "Student-t E|z| requires nu > 2");
  }
  const double v = *nu;
  const double log_ratio = detail::t_log_gamma_ratio(v);
  return 2.0 * std::sqrt(v - 2.0) * std::exp(log_ratio) / (std::sqrt(std::numbers::pi) * (v - 1.0));
}

double log_density(Distribution dist, std::optional<double> nu, double residual, double variance) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  if (dist == Distribution::Normal) {
    return -0.5 * (kLog2Pi + std::log(variance) + residual * residual / variance);
  }
  const double v = *nu;
  const double constant =
      detail::t_log_gamma_ratio(v) - 0.5 * std::log(std::numbers::pi * (v - 2.0));
  return constant - 0.5 * std::log(variance) -
         0.5 * (v + 1.0) * std::log1p(residual * residual / (variance * (v - 2.0)));
}

namespace detail {

double t_log_gamma_ratio(double nu) {
  // Gamma(z) / Gamma(z + 1/2) without forming either gamma.
  return -std::log(boost::math::tgamma_delta_ratio(0.5 * nu, 0.5));
}

double variance_step(const GarchSpec& spec, const GarchParams& params, double abs_z_mean,
                     std::span<const double> residuals, std::span<const double> variances, std::size_t t,
                     std::size_t& clamps) {
  const auto p = static_cast<std::size_t>(spec.p);
  const auto o = static_cast<std::size_t>(spec.o);
  const auto q = static_cast<std::size_t>(spec.q);

  switch (spec.family) {
    case Family::Garch:
    case Family::Gjr: {
      double v = params.omega;
      for (std::size_t i = 1; i <= p; ++i) {
        const double e = residuals[t - i];
        v += params.alpha[i - 1] * e * e;
      }
      for (std::size_t i = 1; i <= o; ++i) {
        const double e = residuals[t - i];
        if (e < 0.0) {
          v += params.gamma[i - 1] * e * e;
        }
      }
      for (std::size_t j = 1; j <= q; ++j) {
        v += params.beta[j - 1] * variances[t - j];
      }
      if (v < kVarianceFloor) {
        ++clamps;
        v = kVarianceFloor;
      }
      return v;
    }
    case Family::Egarch: {
      double log_v = params.omega;
      for (std::size_t i = 1; i <= std::max(p, o); ++i) {
        const double z = residuals[t - i] / std::sqrt(variances[t - i]);
        if (i <= p) {
          log_v += params.alpha[i - 1] * (std::abs(z) - abs_z_mean);
        }
        if (i <= o) {
          log_v += params.gamma[i - 1] * z;
        }
      }
      for (std::size_t j = 1; j <= q; ++j) {
        log_v += params.beta[j - 1] * std::log(variances[t - j]);
      }
      if (log_v > kLogVarianceCeiling) {
        ++clamps;
        log_v = kLogVarianceCeiling;
      }
      double v = std::exp(log_v);
      if (v < kVarianceFloor) {
        ++clamps;
        v = kVarianceFloor;
      }
      return v;
    }
    case Family::Tgarch: {
      double s = params.omega;
      for (std::size_t i = 1; i <= p; ++i) {
        const double e = residuals[t - i];
        const double g = i <= o ? params.gamma[i - 1] : 0.0;
        const double pos = std::max(e, 0.0);
        const double neg = std::min(e, 0.0);
        s += params.alpha[i - 1] * ((1.0 - g) * pos - (1.0 + g) * neg);
      }
      for (std::size_t j = 1; j <= q; ++j) {
        s += params.beta[j - 1] * std::sqrt(variances[t - j]);
      }
      double v = s * s;
      if (!(s > 0.0) || v < kVarianceFloor) {
        ++clamps;
        v = kVarianceFloor;
      }
      return v;
    }
  }
  return kVarianceFloor;
}

}  // namespace detail

LagState default_presample(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns) {
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  const double mu = spec.mean == MeanModel::Constant ? params.mu : 0.0;
  double seed = 0.0;
  if (returns.size() >= 2) {
    double mean_resid = 0.0;
    for (double r : returns) mean_resid += r - mu;
    mean_resid /= static_cast<double>(returns.size());
    for (double r : returns) {
      const double d = r - mu - mean_resid;
      seed += d * d;
    }
    seed /= static_cast<double>(returns.size() - 1);
  }
  LagState state;
  state.residuals.assign(lags, 0.0);
  state.variances.assign(lags, std::max(seed, kVarianceFloor));
  return state;
}

Innovations variance_filter(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns,
                            const LagState& presample) {
  validate_params(spec, params);
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  if (returns.size() <= lags) {
    throw Error(ErrorKind::SeriesTooShort,
                fmt::format("{} needs more than {} returns, got {}", spec.label(), lags, returns.size()));
  }
  if (presample.residuals.size() < lags || presample.variances.size() < lags) {
    throw Error(ErrorKind::InvalidState, fmt::format("pre-sample needs {} lags", lags));
  }
  for (double v : presample.variances) {
    if (!(v > 0.0)) {
      throw Error(ErrorKind::InvalidState, "pre-sample variances must be positive");
    }
  }

  const double mu = spec.mean == MeanModel::Constant ? params.mu : 0.0;
  const double abs_z_mean = spec.family == Family::Egarch ? expected_abs_innovation(spec.dist, params.nu) : 0.0;
  const auto n = returns.size();

  std::vector<double> eps(lags + n);
  std::vector<double> var(lags + n);
  std::copy(presample.residuals.end() - static_cast<std::ptrdiff_t>(lags), presample.residuals.end(), eps.begin());
  std::copy(presample.variances.end() - static_cast<std::ptrdiff_t>(lags), presample.variances.end(), var.begin());

  Innovations out;
  for (std::size_t t = 0; t < n; ++t) {
    eps[lags + t] = returns[t] - mu;
    var[lags + t] = detail::variance_step(spec, params, abs_z_mean, eps, var, lags + t, out.clamp_events);
  }
  out.residuals.assign(eps.begin() + static_cast<std::ptrdiff_t>(lags), eps.end());
  out.variances.assign(var.begin() + static_cast<std::ptrdiff_t>(lags), var.end());
  out.standardized.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.standardized[t] = out.residuals[t] / std::sqrt(out.variances[t]);
  }
  return out;
}

Innovations variance_filter(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns) {
  validate_params(spec, params);
  return variance_filter(spec, params, returns, default_presample(spec, params, returns));
}

LagState Innovations::tail(std::size_t lags) const {
  if (residuals.size() < lags || variances.size() < lags) {
    throw Error(ErrorKind::InvalidState, fmt::format("need {} trailing observations, have {}", lags, residuals.size()));
  }
  LagState state;
  state.residuals.assign(residuals.end() - static_cast<std::ptrdiff_t>(lags), residuals.end());
  state.variances.assign(variances.end() - static_cast<std::ptrdiff_t>(lags), variances.end());
  return state;
}

double log_likelihood(const GarchSpec& spec, const GarchParams& params, std::span<const double> returns) {
  const auto innov = variance_filter(spec, params, returns);
  constexpr double kLog2Pi = 1.8378770664093454836;
  double total = 0.0;
  if (spec.dist == Distribution::Normal) {
    for (std::size_t t = 0; t < innov.residuals.size(); ++t) {
      const double e = innov.residuals[t];
      const double h = innov.variances[t];
      total -= 0.5 * (kLog2Pi + std::log(h) + e * e / h);
    }
  } else {
    const double v = *params.nu;
    const double constant = detail::t_log_gamma_ratio(v) - 0.5 * std::log(std::numbers::pi * (v - 2.0));
    for (std::size_t t = 0; t < innov.residuals.size(); ++t) {
      const double e = innov.residuals[t];
      const double h = innov.variances[t];
      total += constant - 0.5 * std::log(h) - 0.5 * (v + 1.0) * std::log1p(e * e / (h * (v - 2.0)));
    }
  }
  if (!std::isfinite(total)) {
    throw Error(ErrorKind::NonFiniteLikelihood, fmt::format("{} log-likelihood is not finite", spec.label()));
  }
  return total;
}

std::optional<double> persistence(const GarchSpec& spec, const GarchParams& params) {
  if (spec.family == Family::Egarch || spec.family == Family::Tgarch) {
    return std::nullopt;
  }
  double sum = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0) +
               std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
  if (spec.family == Family::Gjr) {
    sum += 0.5 * std::accumulate(params.gamma.begin(), params.gamma.end(), 0.0);
  }
  return sum;
}

bool is_stationary(const GarchSpec& spec, const GarchParams& params) {
  if (const auto pers = persistence(spec, params)) {
    return *pers < 1.0;
  }
  const double beta_sum = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
  if (spec.family == Family::Egarch) {
    // Log variance is an AR(q) in beta: every companion root inside the unit circle.
    const auto q = static_cast<Eigen::Index>(params.beta.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index j = 0; j < q; ++j) companion(0, j) = params.beta[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 1; j < q; ++j) companion(j, j - 1) = 1.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
  }
  const double alpha_sum = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0);
  return beta_sum + alpha_sum * expected_abs_innovation(spec.dist, params.nu) < 1.0;
}

std::optional<double> unconditional_variance(const GarchSpec& spec, const GarchParams& params) {
  const auto pers = persistence(spec, params);
  if (!pers) {
    return std::nullopt;
  }
  if (*pers >= 1.0) {
    throw Error(ErrorKind::NonStationary, fmt::format("{} persistence {} >= 1", spec.label(), *pers));
  }
  return params.omega / (1.0 - *pers);
}

}  // namespace fxvol
