#include <catch2/catch_amalgamated.hpp>

#include <fxvol/error.hpp>

#include "config.hpp"
#include "pipeline.hpp"
#include "synthetic.hpp"

#include "scratch.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

using namespace fxvol;
using namespace fxvol::pipeline;
using testing_support::read_text;
using testing_support::ScratchDir;
using testing_support::write_text;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected fxvol::Error");
  return ErrorKind::InvalidState;
}

// A small synthetic pair written into `dir`.
void write_pair(const fs::path& dir, const std::string& name, std::size_t n, std::uint64_t seed, bool with_iv = true) {
  SyntheticOptions opt;
  opt.n_returns = n;
  opt.seed = seed;
  const auto data = make_synthetic(opt);
  write_prices(dir / (name + "_prices.csv"), data.prices);
  if (with_iv) write_text(dir / (name + "_iv.csv"), iv_csv(data.iv));
}

std::string small_config(const fs::path& out, bool with_iv = true) {
  return fmt::format(R"({{
  "pairs": [{{"name": "AAA", "prices": "AAA_prices.csv"{}}}],
  "holdout": 80,
  "grid": {{"p_max": 2, "q_max": 2}},
  "backtest": {{"specs": ["GARCH(1,1)-t", "GJR(1,1,1)-normal", "TGARCH(1,1,1)-normal"],
               "window": 150, "refit_every": 20, "mc_paths": 200}},
  "optimizer": {{"restarts": 0}},
  "output_dir": "{}"
}})",
                     with_iv ? R"(, "iv": "AAA_iv.csv")" : "", out.generic_string());
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_text(e.path());
  }
  return files;
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

int run_cli(const std::string& args) {
  const auto command = fmt::format("\"{}\" {} >/dev/null 2>&1", FXVOL_CLI_PATH, args);
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing, overrides and validation", "[pipeline]") {
  ScratchDir dir;
  write_pair(dir.path(), "AAA", 300, 1);
  const auto config = parse_config(small_config(dir / "out"), dir.path());
  REQUIRE(config.pairs.size() == 1);
  CHECK(config.pairs[0].prices == dir / "AAA_prices.csv");
  CHECK(config.pairs[0].iv);
  CHECK(config.holdout == 80);
  CHECK(config.grid_p_max == 2);
  CHECK(config.specs.size() == 3);
  CHECK(config.window == 150);
  CHECK(config.proxy_window == 20);
  CHECK(config.ewma.lambda == 0.97);

  const auto tuned = parse_config(small_config(dir / "out"), dir.path(), {"backtest.window=250", "seed=7"});
  CHECK(tuned.window == 250);
  CHECK(tuned.seed == 7);

  CHECK(kind_of([&] { parse_config(small_config(dir / "out"), dir.path(), {"backtest.windw=250"}); }) ==
        ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { parse_config(R"({"pairs": [], "colour": 1})", dir.path()); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { parse_config("{not json", dir.path()); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { parse_config(small_config(dir / "out"), dir.path(), {"backtest.window=10"}).validate(); }) ==
        ErrorKind::InvalidConfig);

  const auto defaults = parse_config(default_config_json(), FXVOL_SOURCE_DIR);
  CHECK(defaults.window == 200);
  CHECK(defaults.horizon == 20);
  CHECK(defaults.holdout == 365);
  CHECK(defaults.grid_p_max == 5);
  CHECK(defaults.alignment == Alignment::Intersection);
  CHECK_NOTHROW(defaults.validate());
}

TEST_CASE("prepare writes nothing when any input is unusable", "[pipeline]") {
  ScratchDir dir;
  write_pair(dir.path(), "AAA", 300, 1);
  write_text(dir / "BBB_prices.csv", "Date,Close\n2020-01-02,1.1\n2020-01-03,oops\n");
  const auto json = fmt::format(R"({{"pairs": [{{"name": "AAA", "prices": "AAA_prices.csv"}},
                                              {{"name": "BBB", "prices": "BBB_prices.csv"}}],
                                   "holdout": 80, "output_dir": "{}"}})",
                                (dir / "out").generic_string());
  const auto config = parse_config(json, dir.path());
  std::ostringstream log;
  CHECK(kind_of([&] { cmd_prepare(config, log); }) == ErrorKind::MalformedRow);
  CHECK_FALSE(fs::exists(dir / "out" / "data" / "AAA"));

  const auto missing = fmt::format(R"({{"pairs": [{{"name": "AAA", "prices": "nowhere.csv"}}], "output_dir": "{}"}})",
                                   (dir / "out").generic_string());
  CHECK(kind_of([&] { cmd_prepare(parse_config(missing, dir.path()), log); }) == ErrorKind::InvalidConfig);
  CHECK_FALSE(fs::exists(dir / "out" / "data"));
}

TEST_CASE("evaluate without forecasts reports missing inputs", "[pipeline]") {
  ScratchDir dir;
  write_pair(dir.path(), "AAA", 300, 1);
  const auto config = parse_config(small_config(dir / "out"), dir.path());
  std::ostringstream log;
  CHECK(kind_of([&] { cmd_evaluate(config, log); }) == ErrorKind::MissingInputs);
  cmd_prepare(config, log);
  CHECK(kind_of([&] { cmd_backtest(parse_config(small_config(dir / "out"), dir.path(), {"backtest.specs=[]"}), log); }) ==
        ErrorKind::MissingInputs);
}

TEST_CASE("a full small run", "[pipeline]") {
  ScratchDir dir;
  write_pair(dir.path(), "AAA", 320, 3);
  const auto config = parse_config(small_config(dir / "out"), dir.path());
  std::ostringstream log;
  run_all(config, log);
  const Layout layout{dir / "out"};

  for (const auto* name : {"prices_clean.csv", "returns.csv", "proxy.csv", "stats.txt", "iv.csv"}) {
    CHECK(fs::is_regular_file(layout.data("AAA") / name));
  }
  CHECK(count_files(layout.grids("AAA"), "_aic.csv") == 8);
  CHECK(count_files(layout.grids("AAA"), "_bic.csv") == 8);
  CHECK(fs::is_regular_file(layout.grids("AAA") / "summary.csv"));
  CHECK(fs::is_regular_file(layout.grids("AAA") / "distribution_comparison.csv"));

  const auto forecasts = layout.forecasts("AAA");
  CHECK(fs::is_regular_file(forecasts / "manifest.csv"));
  CHECK(fs::is_regular_file(forecasts / (slug("EWMA(0.97)") + "__filter.csv")));
  CHECK(fs::is_regular_file(forecasts / "garch_1_1_t__rolling.csv"));
  CHECK(fs::is_regular_file(forecasts / "garch_1_1_t__expanding.csv"));
  // EWMA, 3 specs x 2 methods, 2 IV models.
  CHECK(count_files(forecasts, ".csv") - count_files(forecasts, ".skipped.csv") == 1 + 1 + 6 + 2);

  const auto report = read_text(layout.reports("AAA") / "evaluation.csv");
  CHECK(report.find("nan") == std::string::npos);
  std::istringstream rows(report);
  std::string line;
  std::getline(rows, line);
  std::size_t n_rows = 0;
  while (std::getline(rows, line)) ++n_rows;
  CHECK(n_rows == 9);
  CHECK(fs::is_regular_file(layout.reports("AAA") / "evaluation.txt"));
  CHECK(fs::is_regular_file(dir / "out" / "reports" / "evaluation.csv"));

  SECTION("reruns are byte-identical") {
    const auto first = snapshot(dir / "out");
    run_all(config, log);
    CHECK(snapshot(dir / "out") == first);
  }

  SECTION("a perfect-foresight forecast ranks first") {
    const auto ewma_file = forecasts / (slug("EWMA(0.97)") + "__filter.csv");
    auto series = read_forecast_csv(ewma_file);
    series.model_label = "Oracle";
    series.predicted = series.realized;
    write_text(forecasts / "oracle__static.csv", forecast_csv(series));
    std::ofstream(forecasts / "manifest.csv", std::ios::app)
        << fmt::format("oracle__static.csv,Oracle,static,{},{},0\n", series.size(), series.size());
    cmd_evaluate(config, log);
    const auto evaluated = read_text(layout.reports("AAA") / "evaluation.csv");
    std::istringstream lines(evaluated);
    std::getline(lines, line);
    bool found = false;
    while (std::getline(lines, line)) {
      if (line.rfind("Oracle,", 0) == 0) {
        found = true;
        CHECK(line.find(",0,0,") != std::string::npos);
        CHECK(line.substr(line.size() - 4) == ",1,1");
      }
    }
    CHECK(found);
  }
}

TEST_CASE("a pair without implied vol skips only the IV models", "[pipeline]") {
  ScratchDir dir;
  write_pair(dir.path(), "AAA", 320, 3, false);
  auto config = parse_config(small_config(dir / "out", false), dir.path());
  std::ostringstream log;
  run_all(config, log);
  const Layout layout{dir / "out"};
  CHECK_FALSE(fs::exists(layout.data("AAA") / "iv.csv"));
  const auto manifest = read_text(layout.forecasts("AAA") / "manifest.csv");
  CHECK(manifest.find("IV-") == std::string::npos);
  CHECK(manifest.find("GARCH(1,1)-t") != std::string::npos);
  CHECK_THAT(log.str(), Catch::Matchers::ContainsSubstring("IV models skipped"));

  // The same data with quotes gives identical GARCH forecasts.
  ScratchDir with;
  write_pair(with.path(), "AAA", 320, 3, true);
  run_all(parse_config(small_config(with / "out", true), with.path()), log);
  CHECK(read_text(layout.forecasts("AAA") / "garch_1_1_t__rolling.csv") ==
        read_text(Layout{with / "out"}.forecasts("AAA") / "garch_1_1_t__rolling.csv"));
}

TEST_CASE("command line exit codes", "[pipeline]") {
  ScratchDir dir;
  write_pair(dir.path(), "AAA", 300, 1);
  write_text(dir / "config.json", small_config(dir / "out"));
  const auto cfg = (dir / "config.json").string();
  CHECK(run_cli("print-config") == 0);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli(fmt::format("-c \"{}\" evaluate", cfg)) != 0);
  CHECK(run_cli(fmt::format("-c \"{}\" -s backtest.windw=3 prepare", cfg)) != 0);
  CHECK(run_cli(fmt::format("-c \"{}\" prepare", cfg)) == 0);
  CHECK(fs::is_regular_file(dir / "out" / "data" / "AAA" / "returns.csv"));
  CHECK(run_cli(fmt::format("-c \"{}\" -o \"{}\" prepare", cfg, (dir / "other").string())) == 0);
  CHECK(fs::is_regular_file(dir / "other" / "data" / "AAA" / "returns.csv"));
  CHECK(run_cli(fmt::format("simulate --dir \"{}\" --name ZZZ --n 50", dir.path().string())) == 0);
  CHECK(fs::is_regular_file(dir / "ZZZ_prices.csv"));
}
