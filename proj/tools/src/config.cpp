#include "config.hpp"

#include <fxvol/csv.hpp>
#include <fxvol/error.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace fxvol::pipeline {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::InvalidConfig, message); }

void check_keys(const json& object, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!object.is_object()) {
    fail(fmt::format("'{}' must be an object", where));
  }
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& [key, value] : object.items()) {
    if (!known.contains(key)) {
      fail(fmt::format("unknown key '{}{}{}'", where, where.empty() ? "" : ".", key));
    }
  }
}

template <typename T>
T get(const json& object, const char* key, const std::string& where, T fallback) {
  if (!object.contains(key)) {
    return fallback;
  }
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    fail(fmt::format("'{}{}{}' has the wrong type", where, where.empty() ? "" : ".", key));
  }
}

std::size_t get_count(const json& object, const char* key, const std::string& where, std::size_t fallback) {
  if (!object.contains(key)) {
    return fallback;
  }
  const auto& v = object.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(fmt::format("'{}.{}' must be a non-negative integer", where, key));
  }
  return v.get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(fmt::format("override '{}' is not key=value", assignment));
  }
  const auto key = assignment.substr(0, eq);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) {
      fail(fmt::format("override key '{}' has an empty component", key));
    }
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        index = std::stoul(part);
      } catch (const std::exception&) {
        fail(fmt::format("override key '{}': '{}' is not an array index", key, part));
      }
      if (index >= node->size()) {
        fail(fmt::format("override key '{}': index {} out of range", key, index));
      }
      node = &(*node)[index];
    } else {
      node = &(*node)[part];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = parse_value(assignment.substr(eq + 1));
}

Family family_from(const json& v, const std::string& where) {
  const auto text = v.is_string() ? v.get<std::string>() : v.dump();
  const auto family = parse_family(text);
  if (!family) fail(fmt::format("{}: unknown family '{}'", where, text));
  return *family;
}

Distribution distribution_from(const json& v, const std::string& where) {
  const auto text = v.is_string() ? v.get<std::string>() : v.dump();
  const auto dist = parse_distribution(text);
  if (!dist) fail(fmt::format("{}: unknown distribution '{}'", where, text));
  return *dist;
}

PipelineConfig from_json(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "", {"pairs", "csv", "cleaning", "proxy_window", "holdout", "ewma", "grid", "backtest",
                       "optimizer", "iv", "evaluation", "output_dir", "seed"});
  PipelineConfig c;

  if (!doc.contains("pairs") || !doc.at("pairs").is_array() || doc.at("pairs").empty()) {
    fail("'pairs' must be a non-empty array");
  }
  for (const auto& item : doc.at("pairs")) {
    check_keys(item, "pairs[]", {"name", "prices", "iv"});
    PairConfig pair;
    pair.name = get<std::string>(item, "name", "pairs[]", "");
    pair.prices = resolve(base_dir, get<std::string>(item, "prices", "pairs[]", ""));
    if (item.contains("iv") && !item.at("iv").is_null()) {
      pair.iv = resolve(base_dir, get<std::string>(item, "iv", "pairs[]", ""));
    }
    c.pairs.push_back(std::move(pair));
  }

  if (doc.contains("csv")) {
    const auto& s = doc.at("csv");
    check_keys(s, "csv", {"date_column", "close_column", "skip_bad_rows"});
    c.schema.date_column = get(s, "date_column", "csv", c.schema.date_column);
    c.schema.close_column = get(s, "close_column", "csv", c.schema.close_column);
    c.skip_bad_rows = get(s, "skip_bad_rows", "csv", c.skip_bad_rows);
  }
  if (doc.contains("cleaning")) {
    const auto& s = doc.at("cleaning");
    check_keys(s, "cleaning", {"enabled", "threshold_pct"});
    c.smoothing = get(s, "enabled", "cleaning", c.smoothing);
    c.outlier_threshold_pct = get(s, "threshold_pct", "cleaning", c.outlier_threshold_pct);
  }
  c.proxy_window = get_count(doc, "proxy_window", "", c.proxy_window);
  c.holdout = get_count(doc, "holdout", "", c.holdout);

  if (doc.contains("ewma")) {
    const auto& s = doc.at("ewma");
    check_keys(s, "ewma", {"lambda", "init_k"});
    c.ewma.lambda = get(s, "lambda", "ewma", c.ewma.lambda);
    c.ewma.init_k = get_count(s, "init_k", "ewma", c.ewma.init_k);
  }

  if (doc.contains("grid")) {
    const auto& s = doc.at("grid");
    check_keys(s, "grid", {"p_max", "q_max", "families", "distributions", "asymmetry", "workers"});
    c.grid_p_max = get(s, "p_max", "grid", c.grid_p_max);
    c.grid_q_max = get(s, "q_max", "grid", c.grid_q_max);
    if (s.contains("families")) {
      c.grid_families.clear();
      for (const auto& f : s.at("families")) c.grid_families.push_back(family_from(f, "grid.families"));
    }
    if (s.contains("distributions")) {
      c.distributions.clear();
      for (const auto& d : s.at("distributions")) c.distributions.push_back(distribution_from(d, "grid.distributions"));
    }
    const auto asym = get<std::string>(s, "asymmetry", "grid", "one");
    if (asym == "one") {
      c.grid.asymmetry = AsymmetryOrder::One;
    } else if (asym == "tied") {
      c.grid.asymmetry = AsymmetryOrder::TiedToP;
    } else {
      fail(fmt::format("grid.asymmetry must be 'one' or 'tied', got '{}'", asym));
    }
    c.grid.workers = get_count(s, "workers", "grid", c.grid.workers);
  }

  if (doc.contains("backtest")) {
    const auto& s = doc.at("backtest");
    check_keys(s, "backtest", {"specs", "methods", "window", "horizon", "refit_every", "warm_start",
                               "truncate_short_windows", "mc_paths"});
    if (s.contains("specs")) {
      for (const auto& label : s.at("specs")) {
        const auto text = label.is_string() ? label.get<std::string>() : label.dump();
        const auto spec = parse_spec_label(text);
        if (!spec) fail(fmt::format("backtest.specs: cannot parse '{}'", text));
        c.specs.push_back(*spec);
      }
    }
    if (s.contains("methods")) {
      c.methods.clear();
      for (const auto& m : s.at("methods")) {
        const auto name = m.is_string() ? m.get<std::string>() : std::string();
        if (name == "rolling") {
          c.methods.push_back(WindowMode::Rolling);
        } else if (name == "expanding") {
          c.methods.push_back(WindowMode::Expanding);
        } else {
          fail(fmt::format("backtest.methods: unknown method '{}'", name));
        }
      }
    }
    c.window = get_count(s, "window", "backtest", c.window);
    c.horizon = get_count(s, "horizon", "backtest", c.horizon);
    c.refit_every = get_count(s, "refit_every", "backtest", c.refit_every);
    c.warm_start = get(s, "warm_start", "backtest", c.warm_start);
    c.truncate_short_windows = get(s, "truncate_short_windows", "backtest", c.truncate_short_windows);
    c.mc_paths = get_count(s, "mc_paths", "backtest", c.mc_paths);
  }

  if (doc.contains("optimizer")) {
    const auto& s = doc.at("optimizer");
    check_keys(s, "optimizer", {"max_iterations", "tolerance", "restarts", "min_observations"});
    c.optimizer.max_iterations = get_count(s, "max_iterations", "optimizer", c.optimizer.max_iterations);
    c.optimizer.tolerance = get(s, "tolerance", "optimizer", c.optimizer.tolerance);
    c.optimizer.restarts = get_count(s, "restarts", "optimizer", c.optimizer.restarts);
    c.optimizer.min_observations = get_count(s, "min_observations", "optimizer", c.optimizer.min_observations);
  }

  if (doc.contains("iv")) {
    const auto& s = doc.at("iv");
    check_keys(s, "iv", {"units", "trading_days"});
    const auto units = get<std::string>(s, "units", "iv", "per_day");
    if (units == "per_day") {
      c.iv_units = IvUnits::PerDay;
    } else if (units == "annualized") {
      c.iv_units = IvUnits::Annualized;
    } else {
      fail(fmt::format("iv.units must be 'per_day' or 'annualized', got '{}'", units));
    }
    c.trading_days = get_count(s, "trading_days", "iv", c.trading_days);
  }

  if (doc.contains("evaluation")) {
    const auto& s = doc.at("evaluation");
    check_keys(s, "evaluation", {"alignment"});
    c.alignment = parse_alignment(get<std::string>(s, "alignment", "evaluation", "intersection"));
  }

  c.output_dir = get<std::string>(doc, "output_dir", "", "out");
  c.seed = get<std::uint64_t>(doc, "seed", "", c.seed);
  c.optimizer.seed = c.seed;
  return c;
}

}  // namespace

void PipelineConfig::validate() const {
  if (pairs.empty()) fail("no currency pairs configured");
  std::set<std::string> names;
  for (const auto& pair : pairs) {
    if (pair.name.empty() || pair.name.find_first_of("/\\ .") != std::string::npos) {
      fail(fmt::format("pair name '{}' must be non-empty and free of path characters", pair.name));
    }
    if (!names.insert(pair.name).second) fail(fmt::format("pair '{}' listed twice", pair.name));
    if (!std::filesystem::is_regular_file(pair.prices)) {
      fail(fmt::format("pair '{}': price file '{}' does not exist", pair.name, pair.prices.string()));
    }
    if (pair.iv && !std::filesystem::is_regular_file(*pair.iv)) {
      fail(fmt::format("pair '{}': IV file '{}' does not exist", pair.name, pair.iv->string()));
    }
  }
  if (!(outlier_threshold_pct > 0.0)) fail("cleaning.threshold_pct must be positive");
  if (proxy_window < 2) fail("proxy_window must be at least 2");
  if (holdout == 0) fail("holdout must be positive");
  if (grid_p_max < 1 || grid_q_max < 1) fail("grid bounds must be at least 1");
  if (grid_families.empty() || distributions.empty()) fail("grid needs at least one family and distribution");
  if (methods.empty()) fail("backtest.methods is empty");
  if (horizon < 2) fail("backtest.horizon must be at least 2");
  if (refit_every == 0) fail("backtest.refit_every must be positive");
  if (mc_paths == 0) fail("backtest.mc_paths must be positive");
  if (trading_days < horizon) fail("iv.trading_days must be at least the horizon");
  if (output_dir.empty()) fail("output_dir is empty");
  try {
    ewma.validate();
    optimizer.validate();
    for (const auto mode : methods) method(mode).validate();
    for (const auto& spec : specs) spec.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

ForecastMethod PipelineConfig::method(WindowMode mode) const {
  auto m = mode == WindowMode::Rolling ? ForecastMethod::rolling(window, horizon) : ForecastMethod::expanding(horizon);
  m.refit_every = refit_every;
  if (mode == WindowMode::Rolling) {
    m.warm_start = warm_start;
    m.truncate_short_windows = truncate_short_windows;
  }
  return m;
}

MonteCarloOptions PipelineConfig::monte_carlo() const {
  MonteCarloOptions mc;
  mc.paths = mc_paths;
  mc.seed = seed;
  return mc;
}

PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                            const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(fmt::format("config is not valid JSON: {}", e.what()));
  }
  for (const auto& o : overrides) {
    apply_override(doc, o);
  }
  return from_json(doc, base_dir);
}

PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::FileUnreadable, fmt::format("cannot open config '{}'", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path(), overrides);
}

std::string default_config_json() {
  return R"({
  "pairs": [
    {"name": "SYN", "prices": "data/synthetic/SYN_prices.csv", "iv": "data/synthetic/SYN_iv.csv"}
  ],
  "csv": {"date_column": "Date", "close_column": "Close", "skip_bad_rows": false},
  "cleaning": {"enabled": true, "threshold_pct": 8.0},
  "proxy_window": 20,
  "holdout": 365,
  "ewma": {"lambda": 0.97, "init_k": 20},
  "grid": {
    "p_max": 5, "q_max": 5,
    "families": ["GARCH", "EGARCH", "GJR", "TGARCH"],
    "distributions": ["normal", "t"],
    "asymmetry": "one",
    "workers": 1
  },
  "backtest": {
    "specs": ["GARCH(1,1)-t", "GARCH(2,2)-t", "EGARCH(1,1,1)-t", "EGARCH(3,1,1)-t",
              "GJR(1,1,1)-t", "GJR(2,1,2)-t", "TGARCH(1,1,1)-t"],
    "methods": ["rolling", "expanding"],
    "window": 200,
    "horizon": 20,
    "refit_every": 1,
    "warm_start": true,
    "truncate_short_windows": false,
    "mc_paths": 1000
  },
  "optimizer": {"max_iterations": 1000, "tolerance": 1e-9, "restarts": 1, "min_observations": 50},
  "iv": {"units": "per_day", "trading_days": 252},
  "evaluation": {"alignment": "intersection"},
  "output_dir": "out",
  "seed": 20230615
}
)";
}

}  // namespace fxvol::pipeline
