#include <catch2/catch_amalgamated.hpp>

#include <fxvol/error.hpp>
#include <fxvol/ivmodel.hpp>

#include "oracles.hpp"
#include "scratch.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fxvol;
using Catch::Approx;

namespace {

BsInputs bs(double s, double k, double r, double t, double sigma = 0.0) { return {s, k, r, t, sigma}; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected fxvol::Error");
  return ErrorKind::InvalidState;
}

IvSeries series_of(std::vector<double> implied, std::vector<double> lag) {
  IvSeries s;
  Date d{2022, 1, 3};
  for (std::size_t i = 0; i < implied.size(); ++i) {
    s.dates.push_back(d);
    d = d.next_weekday();
  }
  s.implied_annual = std::move(implied);
  s.realized_lag = std::move(lag);
  return s;
}

bool time_value_resolved(const BsInputs& in, double sigma) {
  const double c = bs_call_price(in);
  return oracle::hp_bs_time_value(in.spot, in.strike, in.rate, sigma, in.maturity) > 4.0 * (std::nextafter(c, 2.0 * c + 1.0) - c) && c > 1e-200;
}

// Whether a one-ulp change in price moves sigma by well under 1e-6.
bool sigma_resolved(const BsInputs& in, double price) {
  const double root_t = std::sqrt(in.maturity);
  const double d1 = (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.sigma * in.sigma) * in.maturity) /
                    (in.sigma * root_t);
  const double vega = in.spot * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * std::numbers::pi) * root_t;
  const double ulp = std::nextafter(price, 2.0 * price + 1.0) - price;
  return vega * 1e-6 > 64.0 * ulp;
}

}  // namespace

TEST_CASE("normal CDF accuracy", "[ivmodel]") {
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::abs(normal_cdf(x) - static_cast<double>(oracle::hp_normal_cdf(oracle::hp(x)))) < 1e-15);
  }
}

TEST_CASE("Black-Scholes call prices", "[ivmodel]") {
  const double atm = bs_call_price(bs(100, 100, 0, 1, 0.2));
  CHECK(atm == Approx(7.96557).margin(1e-4));
  CHECK(atm == Approx(oracle::hp_bs_call(100, 100, 0, 0.2, 1)).epsilon(1e-13));
  CHECK(bs_call_price(bs(100, 90, 0.03, 0.5, 1e-8)) == Approx(100 - 90 * std::exp(-0.015)).margin(1e-6));
  CHECK(bs_call_price(bs(100, 1e-9, 0.01, 1, 0.3)) == Approx(100.0).margin(1e-6));
  CHECK(kind_of([] { bs_call_price(bs(100, 100, 0, 0, 0.2)); }) == ErrorKind::InvalidInputs);
  CHECK(kind_of([] { bs_call_price(bs(-1, 100, 0, 1, 0.2)); }) == ErrorKind::InvalidInputs);
}

TEST_CASE("prices lie inside the no-arbitrage band and rise with sigma", "[ivmodel][property]") {
  for (double m : {0.8, 0.9, 1.0, 1.1, 1.2}) {
    for (double t : {0.05, 0.5, 2.0}) {
      double prev = 0.0;
      for (double sigma = 0.01; sigma <= 2.0 + 1e-12; sigma += 0.01) {
        const auto in = bs(100 * m, 100, 0.02, t, sigma);
        const double c = bs_call_price(in);
        const double lower = std::max(in.spot - in.strike * std::exp(-in.rate * t), 0.0);
        CHECK(c >= prev);
        CHECK(c >= lower);
        CHECK(c < in.spot);
        // Strictness can only be observed once the time value clears the
        // spacing of doubles near the price.
        if (time_value_resolved(in, sigma)) {
          CHECK(c > prev);
          CHECK(c > lower);
        }
        prev = c;
      }
    }
  }
}

TEST_CASE("implied volatility inverts the price", "[ivmodel]") {
  CHECK(implied_vol(bs_call_price(bs(100, 100, 0, 1, 0.2)), bs(100, 100, 0, 1)) == Approx(0.2).margin(1e-6));
  CHECK(implied_vol(7.96557, bs(100, 100, 0, 1)) == Approx(0.2).margin(1e-6));
  CHECK(kind_of([] { implied_vol(10.0, bs(110, 100, 0, 1)); }) == ErrorKind::PriceOutOfBand);
  CHECK(kind_of([] { implied_vol(100.0, bs(100, 100, 0, 1)); }) == ErrorKind::PriceOutOfBand);

  std::size_t points = 0;
  std::size_t resolved = 0;
  for (double m = 0.8; m <= 1.2 + 1e-9; m += 0.05) {
    for (double t : {0.05, 0.25, 0.5, 1.0, 2.0}) {
      for (double sigma : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        for (double r : {0.0, 0.025, 0.05}) {
          const auto in = bs(100 * m, 100, r, t, sigma);
          const double price = bs_call_price(in);
          const double lower = std::max(in.spot - in.strike * std::exp(-r * t), 0.0);
          ++points;
          if (sigma_resolved(in, price)) {
            ++resolved;
            CHECK(implied_vol(price, in) == Approx(sigma).margin(1e-6));
          } else if (price <= lower) {
            CHECK(kind_of([&] { implied_vol(price, in); }) == ErrorKind::PriceOutOfBand);
          } else {
            // A price that is representable but too coarse to pin sigma still
            // inverts to something that reprices it.
            const double back = implied_vol(price, in);
            auto again = in;
            again.sigma = back;
            CHECK(std::abs(bs_call_price(again) - price) <= 1e-8);
          }
        }
      }
    }
  }
  CHECK(points >= 500);
  CHECK(resolved >= points - 30);
}

TEST_CASE("annual to horizon scaling", "[ivmodel]") {
  CHECK(scale_annual_to_horizon(12.0, 20, 252) == Approx(3.38061701).epsilon(1e-8));
  CHECK(scale_annual_to_horizon(12.0, 252, 252) == 12.0);
  CHECK(scale_annual_to_horizon(0.0, 20, 252) == 0.0);
}

TEST_CASE("OLS on worked cases", "[ivmodel]") {
  const auto line = ols({{0.0, 1.0}}, std::vector<double>{1.0, 3.0});
  CHECK(line.coef[0] == Approx(1.0).margin(1e-14));
  CHECK(line.coef[1] == Approx(2.0).margin(1e-14));
  CHECK(line.r_squared == 1.0);

  const auto flat = ols({{0.3, 1.2, 0.7, 2.0, 1.1}}, std::vector<double>(5, 0.4));
  CHECK(flat.coef[1] == Approx(0.0).margin(1e-14));
  CHECK(flat.r_squared == 0.0);

  CHECK(kind_of([] { ols({{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}}, std::vector<double>{1, 2, 4}); }) ==
        ErrorKind::SingularDesign);
  CHECK(kind_of([] { ols({{1.0}}, std::vector<double>{1.0}); }) == ErrorKind::TooFewObservations);
}

TEST_CASE("OLS diagnostics match a reference regression", "[ivmodel]") {
  // Reference values from statsmodels OLS on the same data.
  const std::vector<double> x1{0.8, 1.1, 0.9, 1.4, 1.6, 1.2, 0.7, 1.9, 1.3, 1.0, 1.5, 1.7};
  const std::vector<double> x2{0.5, 0.6, 0.4, 0.9, 0.8, 0.7, 0.5, 1.1, 0.6, 0.6, 0.9, 1.0};
  const std::vector<double> y{0.62, 0.75, 0.58, 0.97, 1.02, 0.80, 0.51, 1.21, 0.86, 0.70, 0.95, 1.12};
  const auto r = ols({x1, x2}, y);
  const std::vector<double> coef{0.104794122035, 0.471937938237, 0.198396240489};
  const std::vector<double> se{0.027880996351, 0.057845677476, 0.098280571449};
  const std::vector<double> t{3.758621848183, 8.158568778725, 2.018672028099};
  const std::vector<double> p{4.494541842626e-03, 1.891591890673e-05, 7.428108795259e-02};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.coef[i] == Approx(coef[i]).epsilon(1e-10));
    CHECK(r.std_errors[i] == Approx(se[i]).epsilon(1e-9));
    CHECK(r.t_stats[i] == Approx(t[i]).epsilon(1e-9));
    CHECK(r.p_values[i] == Approx(p[i]).epsilon(1e-8));
  }
  CHECK(r.r_squared == Approx(0.9882004708719098).epsilon(1e-12));
  CHECK(r.adj_r_squared == Approx(0.9855783532878897).epsilon(1e-12));
  CHECK(r.f_stat == Approx(376.8711505900021).epsilon(1e-10));
  CHECK(r.f_pvalue == Approx(2.105673565940295e-09).epsilon(1e-7));
  CHECK(r.loglik == Approx(28.31501619918631).epsilon(1e-12));
  CHECK(r.aic == Approx(-50.63003239837262).epsilon(1e-12));
  CHECK(r.bic == Approx(-49.175312449008615).epsilon(1e-12));
  CHECK(r.n_obs == 12);
  CHECK(r.df_resid == 9);
}

TEST_CASE("OLS agrees with the normal equations and leaves orthogonal residuals", "[ivmodel][property]") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(100), b(100), y(100);
    for (std::size_t i = 0; i < 100; ++i) {
      a[i] = 10.0 + 2.0 * n01(rng);
      b[i] = 0.5 * a[i] + n01(rng);
      y[i] = 0.3 + 0.8 * a[i] - 0.4 * b[i] + 0.5 * n01(rng);
    }
    const auto fit = ols({a, b}, y);
    const auto want = oracle::normal_equations({a, b}, y);
    for (std::size_t j = 0; j < 3; ++j) CHECK(fit.coef[j] == Approx(want[j]).margin(1e-10));
    double scale = 0.0;
    for (std::size_t i = 0; i < 100; ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i]), std::abs(y[i])});
    double xe0 = 0.0, xe1 = 0.0, xe2 = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      xe0 += fit.residuals[i];
      xe1 += a[i] * fit.residuals[i];
      xe2 += b[i] * fit.residuals[i];
    }
    CHECK(std::max({std::abs(xe0), std::abs(xe1), std::abs(xe2)}) < 1e-8 * scale);
    for (std::size_t j = 0; j < 3; ++j) CHECK(fit.t_stats[j] == Approx(fit.coef[j] / fit.std_errors[j]));
    CHECK(fit.adj_r_squared <= fit.r_squared);

    const auto smaller = ols({a}, y);
    CHECK(fit.r_squared >= smaller.r_squared);
  }
}

TEST_CASE("IV dataset alignment", "[ivmodel]") {
  ReturnSeries r;
  Date d{2021, 1, 4};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 60; ++i) {
    r.dates.push_back(d);
    r.returns.push_back(n01(rng));
    d = d.next_weekday();
  }
  IvQuotes q;
  for (std::size_t i = 0; i < r.size(); i += 2) {
    q.dates.push_back(r.dates[i]);
    q.implied_annual.push_back(8.0 + static_cast<double>(i) * 0.01);
  }
  const auto data = build_iv_dataset(r, q, 5, 10);
  REQUIRE(data.regressors.size() > 0);
  for (std::size_t k = 0; k < data.regressors.size(); ++k) {
    const auto t = data.origin_index[k];
    CHECK(t % 2 == 0);
    CHECK(t >= 9);
    CHECK(t + 5 < r.size());
    CHECK(data.regressors.dates[k] == r.dates[t]);
    const std::span<const double> back(r.returns.data() + t - 9, 10);
    const std::span<const double> ahead(r.returns.data() + t + 1, 5);
    CHECK(data.regressors.realized_lag[k] == Approx(sample_std(back)).epsilon(1e-13));
    CHECK(data.target[k] == Approx(sample_std(ahead)).epsilon(1e-13));
  }
}

TEST_CASE("IV regressions and predictions", "[ivmodel]") {
  auto model = IvRegressionModel{};
  model.units = IvUnits::Annualized;
  model.beta0 = 0.0;
  model.beta1 = 1.0;
  auto pred = predict_iv_regression(model, series_of({2.0}, {0.0}), std::vector<double>{1.0});
  CHECK(pred.series.predicted[0] == 2.0);

  model.beta0 = 0.0698;
  model.beta1 = 0.0983;
  pred = predict_iv_regression(model, series_of({1.0}, {0.0}), std::vector<double>{1.0});
  CHECK(pred.series.predicted[0] == Approx(0.1681).epsilon(1e-12));
  model.beta0 = 0.07;
  pred = predict_iv_regression(model, series_of({1.0}, {0.0}), std::vector<double>{1.0});
  CHECK(pred.series.predicted[0] == Approx(0.1683).epsilon(1e-12));

  model.beta0 = 0.0;
  model.beta1 = 0.0;
  pred = predict_iv_regression(model, series_of({1.0, 5.0}, {0.0, 0.0}), std::vector<double>{1.0, 1.0});
  CHECK(pred.series.predicted == std::vector<double>{0.0, 0.0});

  model.beta0 = -1.0;
  model.beta1 = 0.1;
  pred = predict_iv_regression(model, series_of({1.0, 50.0}, {0.0, 0.0}), std::vector<double>{1.0, 1.0});
  CHECK(pred.floored == 1);
  CHECK(pred.series.predicted[0] == 0.0);

  CHECK(kind_of([&] { predict_iv_regression(model, series_of({1.0}, {0.0}), std::vector<double>{1.0, 2.0}); }) ==
        ErrorKind::MisalignedSeries);
}

TEST_CASE("fitting both IV models", "[ivmodel]") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<double> implied, lag, target;
  for (int i = 0; i < 200; ++i) {
    implied.push_back(9.0 + 2.0 * n01(rng));
    lag.push_back(0.5 + 0.1 * n01(rng));
    target.push_back(0.1 + 0.9 * implied.back() / std::sqrt(252.0) + 0.2 * lag.back() + 0.02 * n01(rng));
  }
  const auto regressors = series_of(implied, lag);
  const auto m1 = fit_iv_regression(IvVariant::Model1, target, regressors, 150);
  const auto m2 = fit_iv_regression(IvVariant::Model2, target, regressors, 150);
  CHECK_FALSE(m1.beta2);
  REQUIRE(m2.beta2);
  CHECK(m2.ols.r_squared >= m1.ols.r_squared);
  CHECK(m2.beta1 == Approx(0.9).margin(0.1));
  CHECK(*m2.beta2 == Approx(0.2).margin(0.1));
  CHECK(m1.ols.n_obs == 150);
  CHECK(m1.label() == "IV-Model1");

  const auto annual = fit_iv_regression(IvVariant::Model1, target, regressors, 150, IvUnits::Annualized);
  CHECK(annual.beta1 == Approx(m1.beta1 / std::sqrt(252.0)).epsilon(1e-9));

  CHECK(kind_of([&] { fit_iv_regression(IvVariant::Model1, target, regressors, 500); }) ==
        ErrorKind::TooFewObservations);
  const std::vector<double> short_target(target.begin(), target.begin() + 10);
  CHECK(kind_of([&] { fit_iv_regression(IvVariant::Model1, short_target, regressors, 5); }) ==
        ErrorKind::MisalignedSeries);

  const auto report = regression_report(m2);
  CHECK_THAT(report, Catch::Matchers::ContainsSubstring("OLS Regression Results"));
  CHECK_THAT(report, Catch::Matchers::ContainsSubstring("R-squared"));
  CHECK_THAT(report, Catch::Matchers::ContainsSubstring("P>|t|"));
}

TEST_CASE("IV quote files", "[ivmodel]") {
  testing_support::ScratchDir dir;
  testing_support::write_text(dir / "iv.csv", "date,implied_annual\n2021-01-05,9.5\n2021-01-04,9.25\n");
  const auto q = load_iv_csv(dir / "iv.csv");
  REQUIRE(q.dates.size() == 2);
  CHECK(q.dates[0] == Date(2021, 1, 4));
  CHECK(q.implied_annual[1] == 9.5);
  testing_support::write_text(dir / "neg.csv", "date,implied_annual\n2021-01-05,-1\n");
  CHECK_THROWS_AS(load_iv_csv(dir / "neg.csv"), Error);
  testing_support::write_text(dir / "dup.csv", "date,implied_annual\n2021-01-05,1\n2021-01-05,2\n");
  CHECK_THROWS_AS(load_iv_csv(dir / "dup.csv"), Error);
  testing_support::write_text(dir / "round.csv", iv_csv(q));
  CHECK(load_iv_csv(dir / "round.csv").implied_annual == q.implied_annual);
}
