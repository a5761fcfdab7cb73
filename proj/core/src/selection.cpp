#include "fxvol/selection.hpp"

#include "fxvol/csv.hpp"
#include "fxvol/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <fmt/format.h>

namespace fxvol {

const GridCell& GridResult::at(int p, int q) const {
  if (p < 1 || p > p_max || q < 1 || q > q_max) {
    throw Error(ErrorKind::InvalidInputs, fmt::format("cell ({}, {}) outside {}x{} grid", p, q, p_max, q_max));
  }
  return cells[static_cast<std::size_t>((p - 1) * q_max + (q - 1))];
}

GarchSpec grid_spec(Family family, Distribution dist, int p, int q, const GridOptions& options) {
  GarchSpec spec;
  spec.family = family;
  spec.dist = dist;
  spec.mean = options.mean;
  spec.p = p;
  spec.q = q;
  if (family == Family::Garch) {
    spec.o = 0;
  } else {
    spec.o = options.asymmetry == AsymmetryOrder::TiedToP ? p : 1;
  }
  return spec;
}

std::optional<std::size_t> best_cell(std::span<const GridCell> cells, Criterion criterion) {
  auto value = [criterion](const GridCell& c) { return criterion == Criterion::Aic ? c.aic : c.bic; };
  auto better = [&](const GridCell& a, const GridCell& b) {
    if (value(a) != value(b)) {
      return value(a) < value(b);
    }
    const int size_a = a.spec.p + a.spec.q;
    const int size_b = b.spec.p + b.spec.q;
    if (size_a != size_b) {
      return size_a < size_b;
    }
    return a.spec.p < b.spec.p;
  };
  auto scan = [&](bool require_converged) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      if (c.failed || !std::isfinite(value(c)) || (require_converged && !c.converged)) {
        continue;
      }
      if (!best || better(c, cells[*best])) {
        best = i;
      }
    }
    return best;
  };
  if (auto best = scan(true)) {
    return best;
  }
  return scan(false);
}

GridResult grid_search(Family family, Distribution dist, std::span<const double> returns, int p_max, int q_max,
                       const OptimizerConfig& config, const GridOptions& options) {
  if (p_max < 1 || q_max < 1) {
    throw Error(ErrorKind::InvalidInputs, "grid bounds must be at least 1");
  }
  GridResult grid;
  grid.family = family;
  grid.dist = dist;
  grid.p_max = p_max;
  grid.q_max = q_max;
  grid.n_obs = returns.size();
  grid.cells.resize(static_cast<std::size_t>(p_max * q_max));
  for (int p = 1; p <= p_max; ++p) {
    for (int q = 1; q <= q_max; ++q) {
      grid.cells[static_cast<std::size_t>((p - 1) * q_max + (q - 1))].spec = grid_spec(family, dist, p, q, options);
    }
  }

  OptimizerConfig cell_config = config;
  cell_config.std_errors = false;
  auto run_cell = [&](GridCell& cell) {
    try {
      const auto result = fit(cell.spec, returns, cell_config);
      cell.loglik = result.loglik;
      cell.aic = result.aic;
      cell.bic = result.bic;
      cell.k = result.num_params();
      cell.converged = result.converged;
    } catch (const Error& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  };

  const auto workers = std::max<std::size_t>(1, std::min(options.workers, grid.cells.size()));
  if (workers == 1) {
    for (auto& cell : grid.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < grid.cells.size(); i = next.fetch_add(1)) {
          run_cell(grid.cells[i]);
        }
      });
    }
  }

  for (const auto& cell : grid.cells) {
    if (cell.failed) {
      grid.failures.push_back(cell.spec);
    }
  }
  const auto best_aic = best_cell(grid.cells, Criterion::Aic);
  const auto best_bic = best_cell(grid.cells, Criterion::Bic);
  if (!best_aic || !best_bic) {
    throw Error(ErrorKind::AllCellsFailed,
                fmt::format("{} {} grid: no cell could be fitted", to_string(family), to_string(dist)));
  }
  grid.best_by_aic = grid.cells[*best_aic].spec;
  grid.best_by_bic = grid.cells[*best_bic].spec;
  return grid;
}

std::string matrix_csv(const GridResult& grid, Criterion criterion) {
  std::string out = "p\\q";
  for (int q = 1; q <= grid.q_max; ++q) out += fmt::format(",{}", q);
  out += '\n';
  for (int p = 1; p <= grid.p_max; ++p) {
    out += fmt::format("{}", p);
    for (int q = 1; q <= grid.q_max; ++q) {
      const auto& cell = grid.at(p, q);
      out += ',';
      out += cell.failed ? std::string("NA") : csv::format_double(criterion == Criterion::Aic ? cell.aic : cell.bic);
    }
    out += '\n';
  }
  return out;
}

DistributionComparison compare_distributions(const GarchSpec& spec, std::span<const double> returns,
                                             const OptimizerConfig& config) {
  DistributionComparison out;
  auto arm = [&](Distribution dist, std::optional<FitResult>& slot, std::string& error) {
    GarchSpec s = spec;
    s.dist = dist;
    try {
      slot = fit(s, returns, config);
    } catch (const Error& e) {
      error = e.what();
    }
  };
  arm(Distribution::Normal, out.normal, out.normal_error);
  arm(Distribution::StudentT, out.student, out.student_error);
  if (out.normal && out.student) {
    out.delta_aic = out.student->aic - out.normal->aic;
    out.delta_bic = out.student->bic - out.normal->bic;
  }
  return out;
}

}  // namespace fxvol
