#include <catch2/catch_amalgamated.hpp>

#include <fxvol/error.hpp>
#include <fxvol/evaluation.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <random>

using namespace fxvol;
using Catch::Approx;

namespace {

ForecastSeries series(const std::string& label, std::vector<double> predicted, std::vector<double> realized,
                      std::size_t first_day = 0) {
  ForecastSeries s;
  s.model_label = label;
  Date d{2022, 3, 1};
  for (std::size_t i = 0; i < first_day; ++i) d = d.next_weekday();
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    s.push_back(d, predicted[i], realized[i]);
    d = d.next_weekday();
  }
  return s;
}

}  // namespace

TEST_CASE("hand-computed metrics", "[evaluation]") {
  const auto worked = series("m", {3.0, 4.0}, {0.0, 0.0});
  CHECK(rmse(worked) == std::sqrt(25.0 / 2.0));
  CHECK(mae(worked) == 3.5);
  CHECK(rmse(series("m", {2.0}, {1.0})) == 1.0);
  CHECK(mae(series("m", {0.0, 0.0}, {1.0, -1.0})) == 1.0);
  const auto perfect = series("m", {0.4, 0.6, 0.9}, {0.4, 0.6, 0.9});
  CHECK(rmse(perfect) == 0.0);
  CHECK(mae(perfect) == 0.0);
  try {
    rmse(ForecastSeries{});
    FAIL("empty series scored");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySeries);
  }
  CHECK_THROWS_AS(mae(ForecastSeries{}), Error);
}

TEST_CASE("metric properties on random series", "[evaluation][property]") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<std::size_t> len(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = len(rng);
    std::vector<double> y(n), yhat(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::abs(n01(rng));
      yhat[i] = std::abs(n01(rng));
    }
    const auto s = series("m", yhat, y);
    const double r = rmse(s);
    const double m = mae(s);
    CHECK(r >= m);
    CHECK(m >= 0.0);
    CHECK(r == Approx(oracle::naive_rmse(y, yhat)).epsilon(1e-13));
    CHECK(m == Approx(oracle::naive_mae(y, yhat)).epsilon(1e-13));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> py(n), pyhat(n), sy(n), syhat(n);
    for (std::size_t i = 0; i < n; ++i) {
      py[i] = y[order[i]];
      pyhat[i] = yhat[order[i]];
      sy[i] = 2.5 * y[i];
      syhat[i] = 2.5 * yhat[i];
    }
    CHECK(rmse(series("m", pyhat, py)) == Approx(r).epsilon(1e-13));
    CHECK(mae(series("m", pyhat, py)) == Approx(m).epsilon(1e-13));
    CHECK(rmse(series("m", syhat, sy)) == Approx(2.5 * r).epsilon(1e-13));
    CHECK(mae(series("m", syhat, sy)) == Approx(2.5 * m).epsilon(1e-13));
  }
}

TEST_CASE("the perfect model ranks first", "[evaluation]") {
  const std::vector<double> y{0.5, 0.7, 0.6, 0.8};
  const auto report = build_report({{series("zero", {0, 0, 0, 0}, y), "static", 0},
                                    {series("oracle", y, y), "static", 0}});
  REQUIRE(report.by_rmse.size() == 2);
  CHECK(report.rows[report.by_rmse[0]].model_label == "oracle");
  CHECK(report.rows[report.by_mae[0]].model_label == "oracle");
  CHECK(*report.rows[report.by_rmse[0]].rmse_rank == 1);
}

TEST_CASE("identical series tie and keep label order", "[evaluation]") {
  const std::vector<double> y{0.5, 0.7, 0.6};
  const std::vector<double> f{0.4, 0.9, 0.6};
  const auto report = build_report({{series("b-model", f, y), "rolling", 0}, {series("a-model", f, y), "rolling", 0}});
  CHECK(*report.rows[0].rmse_rank == 1);
  CHECK(*report.rows[1].rmse_rank == 1);
  CHECK(report.rows[report.by_rmse[0]].model_label == "a-model");
  CHECK(report.rows[report.by_rmse[1]].model_label == "b-model");
}

TEST_CASE("a model with every origin skipped is reported as N/A", "[evaluation]") {
  const std::vector<double> y{0.5, 0.7, 0.6};
  ForecastSeries empty;
  empty.model_label = "EGARCH(1,1,1)-t";
  const auto report = build_report({{series("GARCH(1,1)-t", y, y), "rolling", 0}, {empty, "rolling", 3}});
  const auto& na = report.rows[1];
  CHECK_FALSE(na.rmse);
  CHECK_FALSE(na.mae);
  CHECK_FALSE(na.rmse_rank);
  CHECK(na.n_skipped == 3);
  CHECK(na.n_forecasts + na.n_skipped == 3);
  CHECK(report.by_rmse.size() == 1);
  CHECK_THAT(report_table(report), Catch::Matchers::ContainsSubstring("N/A"));
  CHECK_THAT(report_csv(report), Catch::Matchers::StartsWith("model,method,rmse,mae,n_forecasts,n_skipped,n_scored"));
}

TEST_CASE("alignment modes", "[evaluation]") {
  // "short" covers days 1..3; "long" covers days 0..3.
  const auto longer = series("long", {1.0, 1.0, 1.0, 1.0}, {0.0, 0.5, 0.5, 0.5});
  const auto shorter = series("short", {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, 1);
  const std::vector<EvaluationInput> inputs{{longer, "x", 0}, {shorter, "x", 1}};

  const auto inter = build_report(inputs, Alignment::Intersection);
  CHECK(inter.rows[0].n_scored == 3);
  CHECK(*inter.rows[0].rmse == Approx(0.5));

  const auto uni = build_report(inputs, Alignment::Union);
  CHECK(uni.rows[0].n_scored == 4);
  CHECK(*uni.rows[0].rmse == Approx(std::sqrt((1.0 + 3 * 0.25) / 4.0)));

  try {
    build_report(inputs, Alignment::Strict);
    FAIL("misaligned inputs accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MisalignedSeries);
  }

  const auto disjoint = series("other", {1.0}, {1.0}, 10);
  CHECK_THROWS_AS(build_report({{longer, "x", 0}, {disjoint, "x", 0}}), Error);

  CHECK(parse_alignment("union") == Alignment::Union);
  CHECK(to_string(Alignment::Intersection) == "intersection");
  CHECK_THROWS_AS(parse_alignment("sideways"), Error);
}
