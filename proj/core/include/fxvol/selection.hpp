#pragma once

#include "fxvol/estimator.hpp"
#include "fxvol/garch.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fxvol {

/// How many gamma lags asymmetric cells carry.
enum class AsymmetryOrder {
  One,       // (p, 1, q)
  TiedToP,   // (p, p, q)
};

enum class Criterion { Aic, Bic };

struct GridOptions {
  AsymmetryOrder asymmetry = AsymmetryOrder::One;
  MeanModel mean = MeanModel::Constant;
  std::size_t workers = 1;
};

struct GridCell {
  GarchSpec spec;
  bool failed = false;
  std::string error;
  bool converged = false;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t k = 0;
};

struct GridResult {
  Family family = Family::Garch;
  Distribution dist = Distribution::Normal;
  int p_max = 0;
  int q_max = 0;
  std::size_t n_obs = 0;
  std::vector<GridCell> cells;  // row-major over p = 1..p_max, q = 1..q_max
  GarchSpec best_by_aic;
  GarchSpec best_by_bic;
  std::vector<GarchSpec> failures;

  [[nodiscard]] const GridCell& at(int p, int q) const;
};

GarchSpec grid_spec(Family family, Distribution dist, int p, int q, const GridOptions& options = {});

/// Index of the winning cell: minimum finite criterion among converged cells
/// (or among all fitted cells when none converged); ties go to the smaller
/// p + q, then the smaller p.
std::optional<std::size_t> best_cell(std::span<const GridCell> cells, Criterion criterion);

/// Fits every (p, q) cell. Throws AllCellsFailed if no cell could be fitted.
GridResult grid_search(Family family, Distribution dist, std::span<const double> returns, int p_max, int q_max,
                       const OptimizerConfig& config = {}, const GridOptions& options = {});

/// Criterion matrix as CSV: rows are p, columns are q, failed cells are NA.
std::string matrix_csv(const GridResult& grid, Criterion criterion);

struct DistributionComparison {
  std::optional<FitResult> normal;
  std::optional<FitResult> student;
  std::string normal_error;
  std::string student_error;
  /// Student-t minus normal; present only when both arms fitted.
  std::optional<double> delta_aic;
  std::optional<double> delta_bic;
};

/// Fits `spec` under both innovation laws on identical data. Per-arm fit
/// errors are captured rather than thrown.
DistributionComparison compare_distributions(const GarchSpec& spec, std::span<const double> returns,
                                             const OptimizerConfig& config = {});

}  // namespace fxvol
