#include "fxvol/estimator.hpp"

#include "fxvol/error.hpp"
#include "fxvol/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace fxvol {

namespace {

constexpr double kNudge = 1e-8;

/// Log-likelihood without parameter validation, reusing its buffers across
/// calls. Returns NaN for points outside the model's domain.
class Evaluator {
 public:
  Evaluator(const GarchSpec& spec, std::span<const double> returns)
      : spec_(spec),
        returns_(returns),
        lags_(static_cast<std::size_t>(spec.max_lag())),
        eps_(lags_ + returns.size()),
        var_(lags_ + returns.size()) {
    const double n = static_cast<double>(returns.size());
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    seed_ = std::max(ss / (n - 1.0), kVarianceFloor);
  }

  double operator()(const GarchParams& params, std::size_t* clamps = nullptr) {
    double constant = 0.0;
    double nu = 0.0;
    if (spec_.dist == Distribution::StudentT) {
      nu = params.nu.value_or(0.0);
      if (!(nu > 2.0) || !std::isfinite(nu)) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      constant = detail::t_log_gamma_ratio(nu) -
                 0.5 * std::log(std::numbers::pi * (nu - 2.0));
    }
    const double abs_z_mean =
        spec_.family == Family::Egarch ? expected_abs_innovation(spec_.dist, spec_.dist == Distribution::StudentT ? std::optional<double>(nu) : std::nullopt) : 0.0;
    const double mu = spec_.mean == MeanModel::Constant ? params.mu : 0.0;

    std::fill(eps_.begin(), eps_.begin() + static_cast<std::ptrdiff_t>(lags_), 0.0);
    std::fill(var_.begin(), var_.begin() + static_cast<std::ptrdiff_t>(lags_), seed_);
    std::size_t clamp_count = 0;
    double total = 0.0;
    constexpr double kLog2Pi = 1.8378770664093454836;
    for (std::size_t t = 0; t < returns_.size(); ++t) {
      const auto idx = lags_ + t;
      const double e = returns_[t] - mu;
      eps_[idx] = e;
      const double v = detail::variance_step(spec_, params, abs_z_mean, eps_, var_, idx, clamp_count);
      var_[idx] = v;
      if (spec_.dist == Distribution::Normal) {
        total -= 0.5 * (kLog2Pi + std::log(v) + e * e / v);
      } else {
        total += constant - 0.5 * std::log(v) - 0.5 * (nu + 1.0) * std::log1p(e * e / (v * (nu - 2.0)));
      }
    }
    if (clamps != nullptr) {
      *clamps = clamp_count;
    }
    return total;
  }

 private:
  GarchSpec spec_;
  std::span<const double> returns_;
  std::size_t lags_;
  std::vector<double> eps_;
  std::vector<double> var_;
  double seed_ = 1.0;
};

bool is_positive_family(Family family) { return family != Family::Egarch; }

double nudged_log(double v) { return std::log(std::max(v, kNudge)); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(tolerance > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "optimizer tolerance must be positive");
  }
  if (max_iterations < 1) {
    throw Error(ErrorKind::InvalidConfig, "optimizer max_iterations must be at least 1");
  }
}

InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n) {
  const double kd = static_cast<double>(k);
  return {2.0 * kd - 2.0 * loglik, kd * std::log(static_cast<double>(n)) - 2.0 * loglik};
}

std::vector<double> transform_to_unconstrained(const GarchSpec& spec, const GarchParams& params) {
  validate_params(spec, params);
  std::vector<double> u;
  u.reserve(spec.num_params());
  if (spec.mean == MeanModel::Constant) {
    u.push_back(params.mu);
  }
  const bool positive = is_positive_family(spec.family);
  u.push_back(positive ? nudged_log(params.omega) : params.omega);
  for (double a : params.alpha) {
    u.push_back(positive ? nudged_log(a) : a);
  }
  for (std::size_t i = 0; i < params.gamma.size(); ++i) {
    const double g = params.gamma[i];
    switch (spec.family) {
      case Family::Gjr:
        u.push_back(nudged_log(params.alpha[i] + g));
        break;
      case Family::Tgarch:
        u.push_back(std::atanh(std::clamp(g, -1.0 + kNudge, 1.0 - kNudge)));
        break;
      default:
        u.push_back(g);
        break;
    }
  }
  for (double b : params.beta) {
    u.push_back(positive ? nudged_log(b) : b);
  }
  if (spec.dist == Distribution::StudentT) {
    u.push_back(nudged_log(*params.nu - 2.0));
  }
  return u;
}

GarchParams transform_from_unconstrained(const GarchSpec& spec, std::span<const double> values) {
  if (values.size() != spec.num_params()) {
    throw Error(ErrorKind::InvalidParams, "unconstrained vector has the wrong length");
  }
  GarchParams params;
  std::size_t i = 0;
  if (spec.mean == MeanModel::Constant) {
    params.mu = values[i++];
  }
  const bool positive = is_positive_family(spec.family);
  auto positive_or_identity = [&](double u) { return positive ? std::exp(u) : u; };
  params.omega = positive_or_identity(values[i++]);
  for (int k = 0; k < spec.p; ++k) params.alpha.push_back(positive_or_identity(values[i++]));
  for (int k = 0; k < spec.o; ++k) {
    const double u = values[i++];
    switch (spec.family) {
      case Family::Gjr:
        params.gamma.push_back(std::exp(u) - params.alpha[static_cast<std::size_t>(k)]);
        break;
      case Family::Tgarch:
        params.gamma.push_back(std::tanh(u));
        break;
      default:
        params.gamma.push_back(u);
        break;
    }
  }
  for (int k = 0; k < spec.q; ++k) params.beta.push_back(positive_or_identity(values[i++]));
  if (spec.dist == Distribution::StudentT) {
    params.nu = 2.0 + std::exp(values[i++]);
  }
  return params;
}

GarchParams default_start(const GarchSpec& spec, std::span<const double> returns) {
  spec.validate();
  const double n = static_cast<double>(returns.size());
  const double mean = n > 0 ? std::accumulate(returns.begin(), returns.end(), 0.0) / n : 0.0;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double var = std::max(n > 1 ? ss / (n - 1.0) : 1.0, 1e-8);

  GarchParams params;
  params.mu = spec.mean == MeanModel::Constant ? mean : 0.0;
  params.alpha.assign(static_cast<std::size_t>(spec.p), 0.05 / spec.p);
  params.gamma.assign(static_cast<std::size_t>(spec.o), spec.o > 0 ? 0.05 / spec.o : 0.0);
  params.beta.assign(static_cast<std::size_t>(spec.q), spec.q > 0 ? 0.85 / spec.q : 0.0);
  if (spec.dist == Distribution::StudentT) {
    params.nu = 8.0;
  }
  const double alpha_sum = spec.p > 0 ? 0.05 : 0.0;
  const double beta_sum = spec.q > 0 ? 0.85 : 0.0;
  const double gamma_sum = spec.o > 0 ? 0.05 : 0.0;
  switch (spec.family) {
    case Family::Garch:
      params.omega = var * (1.0 - alpha_sum - beta_sum);
      break;
    case Family::Gjr:
      params.omega = var * (1.0 - alpha_sum - 0.5 * gamma_sum - beta_sum);
      break;
    case Family::Egarch:
      params.omega = (1.0 - beta_sum) * std::log(var);
      break;
    case Family::Tgarch:
      params.omega = std::sqrt(var) * (1.0 - beta_sum - alpha_sum * expected_abs_innovation(spec.dist, params.nu));
      break;
  }
  return params;
}

std::vector<double> unconstrained_gradient(const GarchSpec& spec, const GarchParams& params,
                                           std::span<const double> returns) {
  Evaluator eval(spec, returns);
  const double n = static_cast<double>(returns.size());
  const optim::Objective objective = [&](std::span<const double> u) {
    return eval(transform_from_unconstrained(spec, u)) / n;
  };
  return optim::central_gradient(objective, transform_to_unconstrained(spec, params), 1e-6);
}

FitResult fit(const GarchSpec& spec, std::span<const double> returns, const OptimizerConfig& config,
              const std::optional<GarchParams>& warm_start) {
  spec.validate();
  config.validate();
  const auto n = returns.size();
  const auto lags = static_cast<std::size_t>(spec.max_lag());
  if (n < std::max(config.min_observations, lags + 1)) {
    throw Error(ErrorKind::SeriesTooShort,
                fmt::format("{} fit needs at least {} returns, got {}", spec.label(),
                            std::max(config.min_observations, lags + 1), n));
  }

  Evaluator eval(spec, returns);
  const double nd = static_cast<double>(n);
  const optim::Objective objective = [&](std::span<const double> u) {
    const double ll = eval(transform_from_unconstrained(spec, u));
    return std::isfinite(ll) ? -ll / nd : std::numeric_limits<double>::infinity();
  };

  const auto cold = transform_to_unconstrained(spec, default_start(spec, returns));
  std::vector<double> base = cold;
  bool warm = false;
  if (warm_start) {
    try {
      auto start = *warm_start;
      // Far into the normal limit the likelihood is flat in nu; pull the tail
      // back so the search can still move it.
      if (start.nu && *start.nu > kWarmStartNuCap) start.nu = kWarmStartNuCap;
      base = transform_to_unconstrained(spec, start);
      warm = true;
    } catch (const Error&) {
      warm = false;
    }
  }

  double sd = 0.0;
  {
    const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / nd;
    for (double r : returns) sd += (r - mean) * (r - mean);
    sd = std::sqrt(sd / (nd - 1.0));
  }

  FitResult result;
  result.spec = spec;
  result.n_obs = n;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_u;
  bool best_converged = false;
  std::size_t best_iterations = 0;

  for (std::size_t start = 0; start <= config.restarts; ++start) {
    std::vector<double> u0 = base;
    if (warm && start == 1) {
      // The first restart of a warm fit is the cold start, so a drifting
      // warm sequence is always checked against a fresh search.
      u0 = cold;
    } else if (start > 0) {
      std::mt19937_64 engine(config.seed + 7919ULL * start);
      std::normal_distribution<double> jitter(0.0, 0.3);
      for (std::size_t i = 0; i < u0.size(); ++i) {
        const bool is_mu = spec.mean == MeanModel::Constant && i == 0;
        const double draw = jitter(engine);
        u0[i] += is_mu ? draw * sd / 3.0 : draw;
      }
    }
    const double f0 = objective(u0);
    if (!std::isfinite(f0)) {
      continue;
    }
    result.initial_logliks.push_back(-f0 * nd);

    optim::NelderMeadOptions nm_options;
    nm_options.max_iterations = config.max_iterations;
    nm_options.f_tolerance = std::max(config.tolerance, 1e-8);
    nm_options.initial_step = warm && start == 0 ? 0.05 : 0.1;
    const auto nm = optim::nelder_mead(objective, u0, nm_options);
    result.evaluations += nm.evaluations;

    optim::BfgsOptions bfgs_options;
    bfgs_options.max_iterations = config.max_iterations;
    bfgs_options.f_tolerance = config.tolerance;
    auto refined = optim::bfgs(objective, nm.x, bfgs_options);
    result.evaluations += refined.evaluations;
    std::size_t iterations = nm.iterations + refined.iterations;
    // A stall on a flat ridge can trip the function tolerance early; restart
    // the quasi-Newton stage from the stalled point while the gradient is
    // still visibly non-zero.
    for (int round = 0; round < 3 && refined.reason == optim::StopReason::FunctionTolerance; ++round) {
      const auto g = optim::central_gradient(objective, refined.x, bfgs_options.fd_step, &result.evaluations);
      if (max_abs(g) < 1e-4) {
        break;
      }
      auto again = optim::bfgs(objective, refined.x, bfgs_options);
      result.evaluations += again.evaluations;
      iterations += again.iterations;
      if (!(again.value <= refined.value)) {
        break;
      }
      refined = std::move(again);
    }

    const bool use_nm = !(refined.value <= nm.value);
    const double value = use_nm ? nm.value : refined.value;
    if (std::isfinite(value) && value < best_value) {
      best_value = value;
      best_u = use_nm ? nm.x : refined.x;
      best_converged = !use_nm && refined.converged();
      best_iterations = iterations;
    }
  }

  if (best_u.empty()) {
    throw Error(ErrorKind::OptimizationFailed,
                fmt::format("{}: every start produced a non-finite likelihood", spec.label()));
  }

  result.params = transform_from_unconstrained(spec, best_u);
  result.loglik = eval(result.params, &result.clamp_events);
  if (!std::isfinite(result.loglik)) {
    throw Error(ErrorKind::OptimizationFailed, fmt::format("{}: optimum has a non-finite likelihood", spec.label()));
  }
  result.converged = best_converged;
  result.iterations = best_iterations;
  const auto k = spec.num_params();
  const auto ic = information_criteria(result.loglik, k, n);
  result.aic = ic.aic;
  result.bic = ic.bic;
  result.stationary = is_stationary(spec, result.params);
  if (!config.std_errors) {
    return result;
  }

  // Standard errors from the inverse Hessian of the negative log-likelihood
  // in natural coordinates.
  const auto theta = result.params.to_vector(spec);
  std::vector<double> steps(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    steps[i] = 1e-4 * std::max(std::abs(theta[i]), 1e-2);
  }
  const optim::Objective natural = [&](std::span<const double> values) {
    return -eval(GarchParams::from_vector(spec, values));
  };
  const auto flat = optim::central_hessian(natural, theta, steps);
  const auto dim = static_cast<Eigen::Index>(theta.size());
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> hessian(
      flat.data(), dim, dim);
  result.std_errors.assign(theta.size(), std::numeric_limits<double>::quiet_NaN());
  result.t_stats.assign(theta.size(), std::numeric_limits<double>::quiet_NaN());
  if (hessian.allFinite()) {
    const Eigen::MatrixXd symmetric = 0.5 * (hessian + hessian.transpose());
    const auto lu = symmetric.fullPivLu();
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = lu.inverse();
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double v = cov(i, i);
        if (v > 0.0 && std::isfinite(v)) {
          const auto idx = static_cast<std::size_t>(i);
          result.std_errors[idx] = std::sqrt(v);
          result.t_stats[idx] = theta[idx] / result.std_errors[idx];
        }
      }
    }
  }
  return result;
}

}  // namespace fxvol
