#include "fxvol/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fxvol::optim {

namespace {

double safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

double fd_step(double x, double relative) { return relative * std::max(1.0, std::abs(x)); }

}  // namespace

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
  const auto n = x0.size();
  MinimizeResult result;
  auto eval = [&](std::span<const double> x) {
    ++result.evaluations;
    return safe(f(x));
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += options.initial_step;
  }
  for (std::size_t i = 0; i <= n; ++i) {
    values[i] = eval(simplex[i]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto point_along = [&](double coeff, std::vector<double>& out, std::size_t worst) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = centroid[j] + coeff * (simplex[worst][j] - centroid[j]);
    }
  };

  result.reason = StopReason::MaxIterations;
  for (; result.iterations < options.max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second_worst = order[n - 1];

    const double spread = values[worst] - values[best];
    if (std::isfinite(values[worst]) &&
        spread <= options.f_tolerance * (std::abs(values[best]) + options.f_tolerance)) {
      result.reason = StopReason::FunctionTolerance;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    point_along(-1.0, trial, worst);
    const double reflected = eval(trial);
    if (reflected < values[best]) {
      point_along(-2.0, trial2, worst);
      const double expanded = eval(trial2);
      if (expanded < reflected) {
        simplex[worst] = trial2;
        values[worst] = expanded;
      } else {
        simplex[worst] = trial;
        values[worst] = reflected;
      }
      continue;
    }
    if (reflected < values[second_worst]) {
      simplex[worst] = trial;
      values[worst] = reflected;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst point.
    const bool outside = reflected < values[worst];
    point_along(outside ? -0.5 : 0.5, trial2, worst);
    const double contracted = eval(trial2);
    if (contracted < std::min(reflected, values[worst])) {
      simplex[worst] = trial2;
      values[worst] = contracted;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      }
      values[i] = eval(simplex[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  if (!std::isfinite(result.value)) {
    result.reason = StopReason::NonFiniteStart;
  }
  return result;
}

std::vector<double> central_gradient(const Objective& f, std::span<const double> x, double relative_step,
                                     std::size_t* evaluations) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i], relative_step);
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  if (evaluations != nullptr) {
    *evaluations += 2 * x.size();
  }
  return grad;
}

MinimizeResult bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options) {
  const auto n = x0.size();
  MinimizeResult result;
  result.x = std::move(x0);
  result.value = safe(f(result.x));
  ++result.evaluations;
  if (!std::isfinite(result.value)) {
    result.reason = StopReason::NonFiniteStart;
    return result;
  }

  auto grad = central_gradient(f, result.x, options.fd_step, &result.evaluations);
  auto reset = [n](std::vector<double>& h) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
  };
  std::vector<double> inv_hessian(n * n);
  reset(inv_hessian);
  bool fresh = true;
  int small_steps = 0;

  std::vector<double> dir(n), x_new(n), s(n), y(n), hy(n);
  result.reason = StopReason::MaxIterations;
  for (; result.iterations < options.max_iterations; ++result.iterations) {
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
    if (!std::isfinite(gnorm)) {
      result.reason = StopReason::LineSearchFailed;
      break;
    }
    if (gnorm < options.gradient_tolerance) {
      result.reason = StopReason::GradientTolerance;
      break;
    }

    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) d -= inv_hessian[i * n + j] * grad[j];
      dir[i] = d;
      slope += d * grad[i];
    }
    if (!(slope < 0.0)) {
      reset(inv_hessian);
      fresh = true;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
      slope = -std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int tries = 0; tries < 50; ++tries) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = result.x[i] + step * dir[i];
      f_new = safe(f(x_new));
      ++result.evaluations;
      if (f_new <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (fresh) {
        result.reason = StopReason::LineSearchFailed;
        break;
      }
      reset(inv_hessian);
      fresh = true;
      continue;
    }

    const double decrease = result.value - f_new;
    auto grad_new = central_gradient(f, x_new, options.fd_step, &result.evaluations);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - result.x[i];
      y[i] = grad_new[i] - grad[i];
    }
    result.x = x_new;
    result.value = f_new;
    grad = std::move(grad_new);

    if (decrease <= options.f_tolerance * std::max(std::abs(result.value), 1e-12)) {
      if (++small_steps >= 2) {
        result.reason = StopReason::FunctionTolerance;
        ++result.iterations;
        break;
      }
    } else {
      small_steps = 0;
    }

    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
    if (sy > 1e-14 * std::sqrt(yy) * std::sqrt(std::inner_product(s.begin(), s.end(), s.begin(), 0.0))) {
      if (fresh) {
        // Scale the identity before the first update.
        const double scale = sy / yy;
        for (auto& h : inv_hessian) h *= scale;
        fresh = false;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += inv_hessian[i * n + j] * y[j];
        hy[i] = acc;
      }
      const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          inv_hessian[i * n + j] +=
              rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
      }
    }
  }
  return result;
}

std::vector<double> central_hessian(const Objective& f, std::span<const double> x, std::span<const double> steps) {
  const auto n = x.size();
  std::vector<double> h(n * n, 0.0);
  std::vector<double> probe(x.begin(), x.end());
  const double f0 = f(probe);
  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    probe[i] += di;
    probe[j] += dj;
    const double v = f(probe);
    probe[i] = x[i];
    probe[j] = x[j];
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = steps[i];
    h[i * n + i] = (at(i, hi, i, 0.0) - 2.0 * f0 + at(i, -hi, i, 0.0)) / (hi * hi);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double hj = steps[j];
      const double v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) /
                       (4.0 * hi * hj);
      h[i * n + j] = v;
      h[j * n + i] = v;
    }
  }
  return h;
}

}  // namespace fxvol::optim
