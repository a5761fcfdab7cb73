#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fxvol::optim {

/// Objective to minimise. Non-finite values mark infeasible points.
using Objective = std::function<double(std::span<const double>)>;

enum class StopReason {
  FunctionTolerance,
  GradientTolerance,
  MaxIterations,
  LineSearchFailed,
  NonFiniteStart,
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  StopReason reason = StopReason::MaxIterations;

  [[nodiscard]] bool converged() const {
    return reason == StopReason::FunctionTolerance || reason == StopReason::GradientTolerance;
  }
};

struct NelderMeadOptions {
  std::size_t max_iterations = 1000;
  double f_tolerance = 1e-9;   // relative spread of simplex values
  double initial_step = 0.1;   // absolute offset along each axis
};

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

struct BfgsOptions {
  std::size_t max_iterations = 500;
  double f_tolerance = 1e-10;       // relative decrease per iteration
  double gradient_tolerance = 1e-7; // infinity norm
  double fd_step = 1e-6;            // relative central-difference step
};

/// Quasi-Newton minimisation with central finite-difference gradients and
/// Armijo backtracking.
MinimizeResult bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& options = {});

std::vector<double> central_gradient(const Objective& f, std::span<const double> x, double relative_step,
                                     std::size_t* evaluations = nullptr);

/// Row-major central-difference Hessian with per-coordinate absolute steps.
std::vector<double> central_hessian(const Objective& f, std::span<const double> x, std::span<const double> steps);

}  // namespace fxvol::optim
