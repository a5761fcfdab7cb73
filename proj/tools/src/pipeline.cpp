#include "pipeline.hpp"

#include <fxvol/csv.hpp>
#include <fxvol/error.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace fxvol::pipeline {

namespace {

namespace fs = std::filesystem;

constexpr const char* kEwmaMethod = "filter";
constexpr const char* kIvMethod = "static";

struct PreparedPair {
  PriceSeries raw;
  PriceSeries cleaned;
  std::size_t replaced = 0;
  std::optional<IvQuotes> iv;
  LoadReport load_report;
};

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  return text;
}

std::string family_slug(Family f) { return lower(std::string(to_string(f))); }

std::string dist_slug(Distribution d) { return d == Distribution::Normal ? "normal" : "t"; }

std::string fmt_value(double v) { return std::isfinite(v) ? csv::format_double(v) : "NA"; }

SampleSplit load_split(const Layout& layout, const PipelineConfig& config, const std::string& pair,
                       ReturnSeries& returns) {
  const auto path = layout.data(pair) / "returns.csv";
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::MissingInputs, fmt::format("'{}' missing; run prepare first", path.string()));
  }
  returns = read_returns(path);
  return split_sample(returns, config.holdout);
}

void clear_csv_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> stale;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".txt")) stale.push_back(entry.path());
  }
  for (const auto& p : stale) fs::remove(p);
}

std::string stats_report(const std::string& pair, const PipelineConfig& config, const PreparedPair& prepared) {
  std::string out = fmt::format("pair: {}\n", pair);
  out += fmt::format("prices: {} rows, {} to {}\n", prepared.raw.size(), prepared.raw.dates.front().iso(),
                     prepared.raw.dates.back().iso());
  if (!prepared.load_report.skipped.empty()) {
    out += fmt::format("skipped rows: {}\n", prepared.load_report.skipped.size());
  }
  if (config.smoothing) {
    out += fmt::format("smoothing: threshold {}%, {} closes replaced\n", config.outlier_threshold_pct,
                       prepared.replaced);
  } else {
    out += "smoothing: disabled\n";
  }
  out += "\nraw returns\n";
  out += format_stats(distribution_stats(compute_returns(prepared.raw)));
  if (config.smoothing && prepared.replaced > 0) {
    out += "\ncleaned returns\n";
    out += format_stats(distribution_stats(compute_returns(prepared.cleaned)));
  }
  return out;
}

std::vector<GarchSpec> specs_from_grid(const Layout& layout, const std::string& pair) {
  const auto path = layout.grids(pair) / "summary.csv";
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::MissingInputs,
                fmt::format("no specs pinned and '{}' missing; run grid first", path.string()));
  }
  const auto table = csv::read(path);
  const auto col = table.column("best_by_bic");
  if (!col) throw Error(ErrorKind::MalformedRow, fmt::format("'{}' lacks best_by_bic", path.string()));
  std::vector<GarchSpec> specs;
  for (const auto& row : table.rows) {
    if (*col >= row.size()) continue;
    const auto spec = parse_spec_label(row[*col]);
    if (spec && std::find(specs.begin(), specs.end(), *spec) == specs.end()) specs.push_back(*spec);
  }
  if (specs.empty()) throw Error(ErrorKind::MissingInputs, fmt::format("'{}' names no usable specs", path.string()));
  return specs;
}

struct ManifestEntry {
  std::string file;
  std::string model;
  std::string method;
  std::size_t origins = 0;
  std::size_t forecasts = 0;
  std::size_t skipped = 0;
};

void write_forecast(const fs::path& dir, const std::string& method, const BacktestResult& result,
                    std::vector<ManifestEntry>& manifest) {
  const auto stem = slug(result.series.model_label) + "__" + method;
  csv::write_atomic(dir / (stem + ".csv"), forecast_csv(result.series));
  if (!result.skipped.empty()) {
    csv::write_atomic(dir / (stem + ".skipped.csv"), skipped_csv(result.skipped));
  }
  manifest.push_back({stem + ".csv", result.series.model_label, method, result.origin_count, result.series.size(),
                      result.skipped.size()});
}

std::string manifest_csv(const std::vector<ManifestEntry>& manifest) {
  std::string out = "file,model,method,origins,forecasts,skipped\n";
  for (const auto& m : manifest) {
    out += fmt::format("{},{},{},{},{},{}\n", csv::quote(m.file), csv::quote(m.model), m.method, m.origins,
                       m.forecasts, m.skipped);
  }
  return out;
}

void backtest_iv(const PipelineConfig& config, const Layout& layout, const std::string& pair,
                 const ReturnSeries& returns, const SampleSplit& split, std::vector<ManifestEntry>& manifest,
                 std::ostream& log) {
  const auto iv_path = layout.data(pair) / "iv.csv";
  if (!fs::is_regular_file(iv_path)) {
    fmt::print(log, "warning: {}: no implied vol data, IV models skipped\n", pair);
    return;
  }
  const auto quotes = load_iv_csv(iv_path);
  const auto data = build_iv_dataset(returns, quotes, config.horizon, config.proxy_window);
  const auto origins = forecast_origins(returns.size(), split.split_index, config.horizon, config.refit_every);
  const std::set<std::size_t> wanted(origins.begin(), origins.end());

  std::size_t train_len = 0;
  while (train_len < data.origin_index.size() && data.origin_index[train_len] + config.horizon < split.split_index) {
    ++train_len;
  }
  IvSeries test;
  std::vector<double> realized;
  std::set<std::size_t> covered;
  for (std::size_t i = 0; i < data.origin_index.size(); ++i) {
    if (!wanted.contains(data.origin_index[i])) continue;
    covered.insert(data.origin_index[i]);
    test.dates.push_back(data.regressors.dates[i]);
    test.implied_annual.push_back(data.regressors.implied_annual[i]);
    test.realized_lag.push_back(data.regressors.realized_lag[i]);
    realized.push_back(data.target[i]);
  }
  std::vector<SkippedOrigin> missing;
  for (const auto t : origins) {
    if (!covered.contains(t)) missing.push_back({returns.dates[t], "no implied vol quote"});
  }

  for (const auto variant : {IvVariant::Model1, IvVariant::Model2}) {
    BacktestResult result;
    result.origin_count = origins.size();
    result.skipped = missing;
    IvRegressionModel model;
    try {
      model = fit_iv_regression(variant, data.target, data.regressors, train_len, config.iv_units,
                                config.trading_days);
    } catch (const Error& e) {
      fmt::print(log, "warning: {}: {} fit failed: {}\n", pair, variant == IvVariant::Model1 ? "IV-Model1" : "IV-Model2",
                 e.what());
      continue;
    }
    auto prediction = predict_iv_regression(model, test, realized);
    result.series = std::move(prediction.series);
    write_forecast(layout.forecasts(pair), kIvMethod, result, manifest);
    auto report = regression_report(model);
    report += fmt::format("training rows: {}\ntest rows: {}\nfloored predictions: {}\n", train_len, test.size(),
                          prediction.floored);
    csv::write_atomic(layout.reports(pair) / (slug(model.label()) + "_regression.txt"), report);
  }
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  const auto table = csv::read(path);
  const auto c_file = table.column("file");
  const auto c_model = table.column("model");
  const auto c_method = table.column("method");
  const auto c_origins = table.column("origins");
  const auto c_forecasts = table.column("forecasts");
  const auto c_skipped = table.column("skipped");
  if (!c_file || !c_model || !c_method || !c_origins || !c_forecasts || !c_skipped) {
    throw Error(ErrorKind::MalformedRow, fmt::format("'{}' has an unexpected header", path.string()));
  }
  std::vector<ManifestEntry> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < table.header.size()) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: too few fields", path.string(), table.line_numbers[r]));
    }
    ManifestEntry m;
    m.file = row[*c_file];
    m.model = row[*c_model];
    m.method = row[*c_method];
    try {
      m.origins = std::stoul(row[*c_origins]);
      m.forecasts = std::stoul(row[*c_forecasts]);
      m.skipped = std::stoul(row[*c_skipped]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::MalformedRow, fmt::format("'{}' line {}: bad count", path.string(), table.line_numbers[r]));
    }
    out.push_back(std::move(m));
  }
  return out;
}

/// Model rows, one column pair per method, in first-seen order.
std::string pivot_csv(const EvaluationReport& report) {
  std::vector<std::string> methods;
  std::vector<std::string> models;
  std::map<std::pair<std::string, std::string>, const ReportRow*> cells;
  for (const auto& row : report.rows) {
    if (std::find(methods.begin(), methods.end(), row.method_label) == methods.end()) methods.push_back(row.method_label);
    if (std::find(models.begin(), models.end(), row.model_label) == models.end()) models.push_back(row.model_label);
    cells[{row.model_label, row.method_label}] = &row;
  }
  std::string out = "model";
  for (const auto& m : methods) out += fmt::format(",{0}_rmse,{0}_mae", m);
  out += '\n';
  for (const auto& model : models) {
    out += csv::quote(model);
    for (const auto& m : methods) {
      const auto it = cells.find({model, m});
      if (it == cells.end()) {
        out += ",-,-";
      } else if (!it->second->rmse) {
        out += ",N/A,N/A";
      } else {
        out += fmt::format(",{},{}", csv::format_double(*it->second->rmse), csv::format_double(*it->second->mae));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string slug(const std::string& label) {
  std::string out;
  bool pending = false;
  for (const unsigned char c : label) {
    if (std::isalnum(c)) {
      if (pending && !out.empty()) out += '_';
      out += static_cast<char>(std::tolower(c));
      pending = false;
    } else {
      pending = true;
    }
  }
  return out;
}

void cmd_prepare(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const Layout layout{config.output_dir};

  std::vector<PreparedPair> prepared;
  for (const auto& pair : config.pairs) {
    PreparedPair p;
    p.raw = load_prices(pair.prices, config.schema, config.skip_bad_rows ? RowPolicy::Skip : RowPolicy::Reject,
                        &p.load_report);
    p.cleaned = config.smoothing ? smooth_outliers(p.raw, config.outlier_threshold_pct, &p.replaced) : p.raw;
    if (pair.iv) p.iv = load_iv_csv(*pair.iv);
    const auto n_returns = p.cleaned.size() - 1;
    if (n_returns <= config.holdout) {
      throw Error(ErrorKind::HoldoutTooLarge,
                  fmt::format("pair '{}': holdout {} leaves no in-sample data from {} returns", pair.name,
                              config.holdout, n_returns));
    }
    prepared.push_back(std::move(p));
  }

  for (std::size_t i = 0; i < config.pairs.size(); ++i) {
    const auto& name = config.pairs[i].name;
    const auto& p = prepared[i];
    const auto dir = layout.data(name);
    const auto returns = compute_returns(p.cleaned);
    write_prices(dir / "prices_clean.csv", p.cleaned);
    write_returns(dir / "returns.csv", returns);
    write_proxy(dir / "proxy.csv", realized_vol(returns, config.proxy_window));
    csv::write_atomic(dir / "stats.txt", stats_report(name, config, p));
    if (p.iv) {
      csv::write_atomic(dir / "iv.csv", iv_csv(*p.iv));
    } else {
      fs::remove(dir / "iv.csv");
    }
    fmt::print(log, "prepare {}: {} returns, {} closes smoothed\n", name, returns.size(), p.replaced);
  }
}

void cmd_grid(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const Layout layout{config.output_dir};
  for (const auto& pair : config.pairs) {
    ReturnSeries returns;
    const auto split = load_split(layout, config, pair.name, returns);
    const auto& sample = split.in_sample.returns;
    const auto dir = layout.grids(pair.name);
    clear_csv_files(dir);

    std::string summary = "family,distribution,best_by_aic,min_aic,best_by_bic,min_bic,failed_cells,n_obs\n";
    std::string comparison = "family,min_aic_normal,min_aic_t,delta_aic,min_bic_normal,min_bic_t,delta_bic\n";
    for (const auto family : config.grid_families) {
      std::map<Distribution, std::pair<double, double>> minima;
      for (const auto dist : config.distributions) {
        const auto stem = family_slug(family) + "_" + dist_slug(dist);
        try {
          const auto grid = grid_search(family, dist, sample, config.grid_p_max, config.grid_q_max, config.optimizer,
                                        config.grid);
          csv::write_atomic(dir / (stem + "_aic.csv"), matrix_csv(grid, Criterion::Aic));
          csv::write_atomic(dir / (stem + "_bic.csv"), matrix_csv(grid, Criterion::Bic));
          const auto aic_idx = best_cell(grid.cells, Criterion::Aic);
          const auto bic_idx = best_cell(grid.cells, Criterion::Bic);
          const double min_aic = grid.cells[*aic_idx].aic;
          const double min_bic = grid.cells[*bic_idx].bic;
          minima[dist] = {min_aic, min_bic};
          summary += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(family), dist_slug(dist),
                                 csv::quote(grid.best_by_aic.label()), fmt_value(min_aic),
                                 csv::quote(grid.best_by_bic.label()), fmt_value(min_bic), grid.failures.size(),
                                 grid.n_obs);
          fmt::print(log, "grid {} {}: best AIC {}, best BIC {}\n", pair.name, stem, grid.best_by_aic.label(),
                     grid.best_by_bic.label());
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::AllCellsFailed) throw;
          std::string na = "p\\q";
          for (int q = 1; q <= config.grid_q_max; ++q) na += fmt::format(",{}", q);
          na += '\n';
          for (int p = 1; p <= config.grid_p_max; ++p) {
            na += std::to_string(p);
            for (int q = 1; q <= config.grid_q_max; ++q) na += ",NA";
            na += '\n';
          }
          csv::write_atomic(dir / (stem + "_aic.csv"), na);
          csv::write_atomic(dir / (stem + "_bic.csv"), na);
          summary += fmt::format("{},{},NA,NA,NA,NA,{},{}\n", to_string(family), dist_slug(dist),
                                 config.grid_p_max * config.grid_q_max, sample.size());
          fmt::print(log, "warning: grid {} {}: {}\n", pair.name, stem, e.what());
        }
      }
      const auto n = minima.find(Distribution::Normal);
      const auto t = minima.find(Distribution::StudentT);
      if (n != minima.end() && t != minima.end()) {
        comparison += fmt::format("{},{},{},{},{},{},{}\n", to_string(family), fmt_value(n->second.first),
                                  fmt_value(t->second.first), fmt_value(t->second.first - n->second.first),
                                  fmt_value(n->second.second), fmt_value(t->second.second),
                                  fmt_value(t->second.second - n->second.second));
      }
    }
    csv::write_atomic(dir / "summary.csv", summary);
    csv::write_atomic(dir / "distribution_comparison.csv", comparison);
  }
}

void cmd_backtest(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const Layout layout{config.output_dir};
  for (const auto& pair : config.pairs) {
    ReturnSeries returns;
    const auto split = load_split(layout, config, pair.name, returns);
    const auto specs = config.specs.empty() ? specs_from_grid(layout, pair.name) : config.specs;
    const auto dir = layout.forecasts(pair.name);
    clear_csv_files(dir);
    fs::create_directories(dir);
    std::vector<ManifestEntry> manifest;

    write_forecast(dir, kEwmaMethod, ewma_backtest(returns, split, config.ewma, config.horizon, config.refit_every),
                   manifest);

    for (const auto& spec : specs) {
      for (const auto mode : config.methods) {
        const auto method = config.method(mode);
        BacktestResult result;
        try {
          result = backtest(spec, returns, split, method, config.optimizer, config.monte_carlo());
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoValidOrigins) throw;
          result.series.model_label = spec.label();
          const auto origins = forecast_origins(returns.size(), split.split_index, method.horizon, method.refit_every);
          result.origin_count = origins.size();
          for (const auto t : origins) result.skipped.push_back({returns.dates[t], "all origins failed"});
          fmt::print(log, "warning: {}: {}\n", pair.name, e.what());
        }
        write_forecast(dir, method.label(), result, manifest);
        fmt::print(log, "backtest {} {} {}: {} forecasts, {} skipped\n", pair.name, spec.label(), method.label(),
                   result.series.size(), result.skipped.size());
      }
    }

    backtest_iv(config, layout, pair.name, returns, split, manifest, log);
    csv::write_atomic(dir / "manifest.csv", manifest_csv(manifest));
  }
}

void cmd_evaluate(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const Layout layout{config.output_dir};
  std::string combined = "pair,model,method,rmse,mae,n_forecasts,n_skipped,n_scored,rmse_rank,mae_rank\n";
  for (const auto& pair : config.pairs) {
    const auto dir = layout.forecasts(pair.name);
    const auto manifest_path = dir / "manifest.csv";
    if (!fs::is_regular_file(manifest_path)) {
      throw Error(ErrorKind::MissingInputs,
                  fmt::format("no forecasts for '{}' ('{}' missing); run backtest first", pair.name,
                              manifest_path.string()));
    }
    const auto manifest = read_manifest(manifest_path);
    if (manifest.empty()) {
      throw Error(ErrorKind::MissingInputs, fmt::format("'{}' lists no forecasts", manifest_path.string()));
    }
    std::vector<EvaluationInput> inputs;
    for (const auto& m : manifest) {
      const auto path = dir / m.file;
      if (!fs::is_regular_file(path)) {
        throw Error(ErrorKind::MissingInputs, fmt::format("forecast file '{}' missing", path.string()));
      }
      EvaluationInput in;
      in.series = read_forecast_csv(path);
      in.series.model_label = m.model;
      in.method_label = m.method;
      in.n_skipped = m.skipped;
      inputs.push_back(std::move(in));
    }
    const auto report = build_report(inputs, config.alignment);
    const auto out = layout.reports(pair.name);
    csv::write_atomic(out / "evaluation.csv", report_csv(report));
    csv::write_atomic(out / "evaluation.txt", report_table(report, fmt::format("{}: RMSE and MAE of volatility forecasts", pair.name)));
    csv::write_atomic(out / "table.csv", pivot_csv(report));

    const auto body = report_csv(report);
    std::size_t pos = body.find('\n') + 1;
    while (pos < body.size()) {
      const auto end = body.find('\n', pos);
      combined += pair.name + "," + body.substr(pos, end - pos + 1);
      pos = end + 1;
    }
    fmt::print(log, "evaluate {}: {} rows, best RMSE {}\n", pair.name, report.rows.size(),
               report.by_rmse.empty() ? std::string("N/A") : report.rows[report.by_rmse.front()].model_label + " " +
                                                                  report.rows[report.by_rmse.front()].method_label);
  }
  csv::write_atomic(layout.root / "reports" / "evaluation.csv", combined);
}

void run_all(const PipelineConfig& config, std::ostream& log) {
  cmd_prepare(config, log);
  cmd_grid(config, log);
  cmd_backtest(config, log);
  cmd_evaluate(config, log);
}

}  // namespace fxvol::pipeline
