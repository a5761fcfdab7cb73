#include <catch2/catch_amalgamated.hpp>

#include <fxvol/error.hpp>
#include <fxvol/garch.hpp>

#include "models.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fxvol;
using Catch::Approx;
using namespace testing_support;

namespace {

GarchParams params_of(double mu, double omega, std::vector<double> a, std::vector<double> g, std::vector<double> b,
                      std::optional<double> nu = std::nullopt) {
  GarchParams p;
  p.mu = mu;
  p.omega = omega;
  p.alpha = std::move(a);
  p.gamma = std::move(g);
  p.beta = std::move(b);
  p.nu = nu;
  return p;
}

/// One step from explicit lags: returns the variance for the observation
/// following `presample`.
double one_step(const GarchSpec& spec, const GarchParams& params, double prev_resid, double prev_var) {
  LagState pre;
  pre.residuals = {prev_resid};
  pre.variances = {prev_var};
  const std::vector<double> r{params.mu, params.mu};
  return variance_filter(spec, params, r, pre).variances[0];
}

}  // namespace

TEST_CASE("spec validation and labels", "[garch]") {
  CHECK_THROWS_AS(spec_of(Family::Garch, 1, 1, 1).validate(), Error);
  CHECK_THROWS_AS(spec_of(Family::Gjr, 1, 2, 1).validate(), Error);
  CHECK_THROWS_AS(spec_of(Family::Garch, 0, 0, 1).validate(), Error);
  CHECK(spec_of(Family::Gjr, 2, 1, 2, Distribution::StudentT).label() == "GJR(2,1,2)-t");
  CHECK(spec_of(Family::Garch, 1, 0, 1).label() == "GARCH(1,1)-normal");
  const auto parsed = parse_spec_label("EGARCH(3,1,1)-t");
  REQUIRE(parsed);
  CHECK(*parsed == spec_of(Family::Egarch, 3, 1, 1, Distribution::StudentT));
  CHECK_FALSE(parse_spec_label("GARCH(1,1,1)-t"));
  CHECK(spec_of(Family::Gjr, 2, 1, 2, Distribution::StudentT).num_params() == 8);
}

TEST_CASE("parameter constraints name the violation", "[garch]") {
  const auto garch = spec_of(Family::Garch, 1, 0, 1);
  try {
    validate_params(garch, params_of(0, -0.1, {0.1}, {}, {0.8}));
    FAIL("negative omega accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParams);
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("omega"));
  }
  CHECK_THROWS_AS(validate_params(garch, params_of(0, 0.1, {-0.1}, {}, {0.8})), Error);
  CHECK_THROWS_AS(validate_params(spec_of(Family::Gjr, 1, 1, 1), params_of(0, 0.1, {0.1}, {-0.2}, {0.8})), Error);
  CHECK_THROWS_AS(
      validate_params(spec_of(Family::Garch, 1, 0, 1, Distribution::StudentT), params_of(0, 0.1, {0.1}, {}, {0.8}, 2.0)),
      Error);
  CHECK_NOTHROW(validate_params(spec_of(Family::Egarch, 1, 1, 1), params_of(0, -0.5, {-0.2}, {0.3}, {-0.4})));
}

TEST_CASE("one-step recursions by hand", "[garch]") {
  CHECK(one_step(spec_of(Family::Garch, 1, 0, 1), params_of(0, 0.1, {0.1}, {}, {0.8}), 1.0, 1.0) ==
        Approx(1.0).epsilon(1e-15));

  const auto gjr = spec_of(Family::Gjr, 1, 1, 1);
  const auto gp = params_of(0, 0.1, {0.05}, {0.1}, {0.8});
  CHECK(one_step(gjr, gp, -1.0, 1.0) == Approx(1.05).epsilon(1e-15));
  CHECK(one_step(gjr, gp, 1.0, 1.0) == Approx(0.95).epsilon(1e-15));

  const double egarch = one_step(spec_of(Family::Egarch, 1, 1, 1), params_of(0, 0.0, {0.1}, {0.0}, {0.0}), 0.0, 1.0);
  CHECK(std::log(egarch) == Approx(-0.1 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  CHECK(std::log(egarch) == Approx(-0.0797885).margin(1e-7));

  const double tg = one_step(spec_of(Family::Tgarch, 1, 1, 1), params_of(0, 0.1, {0.1}, {0.0}, {0.8}), -2.0, 1.0);
  CHECK(std::sqrt(tg) == Approx(1.1).epsilon(1e-15));
}

TEST_CASE("TGARCH asymmetry follows the (1 -/+ gamma) weights", "[garch]") {
  const auto spec = spec_of(Family::Tgarch, 1, 1, 0);
  const auto p = params_of(0, 0.1, {0.2}, {0.5}, {});
  CHECK(std::sqrt(one_step(spec, p, 1.0, 1.0)) == Approx(0.1 + 0.2 * 0.5 * 1.0));
  CHECK(std::sqrt(one_step(spec, p, -1.0, 1.0)) == Approx(0.1 + 0.2 * 1.5 * 1.0));
}

TEST_CASE("variance_filter matches the naive loop for every family", "[garch][property]") {
  std::mt19937_64 rng(2024);
  for (Family family : {Family::Garch, Family::Egarch, Family::Gjr, Family::Tgarch}) {
    for (int trial = 0; trial < 60; ++trial) {
      const auto m = random_model(family, rng);
      const auto r = random_returns(rng, std::uniform_int_distribution<std::size_t>(5, 50)(rng));
      const auto got = variance_filter(m.spec, m.params, r);
      const auto want = oracle::naive_variances(to_oracle(family), to_oracle(m.params), r);
      REQUIRE(got.variances.size() == want.size());
      CHECK(got.residuals.size() == r.size());
      CHECK(got.standardized.size() == r.size());
      for (std::size_t t = 0; t < want.size(); ++t) {
        INFO(m.spec.label() << " t=" << t);
        CHECK(std::abs(got.variances[t] - want[t]) <= 1e-10 * std::max(1.0, want[t]));
        CHECK(got.variances[t] > 0.0);
      }
      CHECK(log_likelihood(m.spec, m.params, r) ==
            Approx(oracle::naive_loglik(to_oracle(family), to_oracle(m.params), r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("variances stay above omega for positive-coefficient families", "[garch][property]") {
  std::mt19937_64 rng(8);
  for (Family family : {Family::Garch, Family::Tgarch}) {
    for (int trial = 0; trial < 30; ++trial) {
      auto m = random_model(family, rng);
      const auto r = random_returns(rng, 40);
      const auto v = variance_filter(m.spec, m.params, r).variances;
      const double floor = family == Family::Garch ? m.params.omega : m.params.omega * m.params.omega;
      for (double x : v) CHECK(x >= floor * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("GJR with zero gamma equals GARCH", "[garch][property]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_model(Family::Garch, rng);
    const auto r = random_returns(rng, 50);
    GarchSpec gjr = m.spec;
    gjr.family = Family::Gjr;
    gjr.o = 1;
    GarchParams gp = m.params;
    gp.gamma = {0.0};
    const auto a = variance_filter(m.spec, m.params, r).variances;
    const auto b = variance_filter(gjr, gp, r).variances;
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(std::abs(a[t] - b[t]) <= 1e-14 * a[t]);
  }
}

TEST_CASE("TGARCH with zero gamma ignores residual signs", "[garch][property]") {
  std::mt19937_64 rng(23);
  const auto spec = spec_of(Family::Tgarch, 2, 2, 1);
  const auto params = params_of(0.0, 0.1, {0.1, 0.05}, {0.0, 0.0}, {0.8});
  const LagState pre{{0.5, -0.3}, {1.2, 0.9}};
  auto r = random_returns(rng, 50);
  const auto base = variance_filter(spec, params, r, pre).variances;
  std::bernoulli_distribution flip(0.5);
  for (auto& x : r) {
    if (flip(rng)) x = -x;
  }
  const auto flipped = variance_filter(spec, params, r, pre).variances;
  for (std::size_t t = 0; t < base.size(); ++t) CHECK(flipped[t] == Approx(base[t]).epsilon(1e-14));
}

TEST_CASE("EGARCH standardized residuals are scale free", "[garch][property]") {
  std::mt19937_64 rng(29);
  const auto spec = spec_of(Family::Egarch, 1, 1, 1);
  auto params = params_of(0.0, -0.1, {0.2}, {-0.1}, {0.9});
  const auto r = random_returns(rng, 50);
  const double c = 3.0;
  std::vector<double> scaled(r);
  for (auto& x : scaled) x *= c;
  LagState pre{{0.0}, {1.0}};
  LagState pre_scaled{{0.0}, {c * c}};
  auto scaled_params = params;
  scaled_params.omega = params.omega + (1.0 - params.beta[0]) * std::log(c * c);
  const auto a = variance_filter(spec, params, r, pre);
  const auto b = variance_filter(spec, scaled_params, scaled, pre_scaled);
  for (std::size_t t = 0; t < r.size(); ++t) CHECK(b.standardized[t] == Approx(a.standardized[t]).epsilon(1e-12));
}

TEST_CASE("series shorter than the lag order", "[garch]") {
  try {
    variance_filter(spec_of(Family::Garch, 3, 0, 1), params_of(0, 0.1, {0.1, 0.1, 0.1}, {}, {0.5}),
                    std::vector<double>{1.0, 2.0});
    FAIL("short series accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesTooShort);
  }
}

TEST_CASE("log densities", "[garch]") {
  CHECK(log_density(Distribution::Normal, std::nullopt, 0.0, 1.0) == Approx(-0.918938533).margin(1e-9));
  CHECK(log_density(Distribution::Normal, std::nullopt, 0.0, std::exp(2.0)) ==
        Approx(-0.918938533 - 1.0).margin(1e-9));
  CHECK(std::abs(log_density(Distribution::StudentT, 1e6, 0.0, 1.0) - (-0.9189385332)) < 1e-5);
  CHECK(std::abs(log_density(Distribution::StudentT, 1e15, 0.7, 1.3) -
                 log_density(Distribution::Normal, std::nullopt, 0.7, 1.3)) < 1e-6);
  // Unit-variance t(5) at z = 1: ln f = lnG(3) - lnG(2.5) - 0.5 ln(3 pi) - 3 ln(4/3).
  const double want = std::lgamma(3.0) - std::lgamma(2.5) - 0.5 * std::log(3.0 * std::numbers::pi) - 3.0 * std::log(4.0 / 3.0);
  CHECK(log_density(Distribution::StudentT, 5.0, 1.0, 1.0) == Approx(want).epsilon(1e-13));
}

TEST_CASE("expected absolute innovation", "[garch]") {
  CHECK(expected_abs_innovation(Distribution::Normal) == Approx(0.7978845608).epsilon(1e-10));
  CHECK(std::abs(expected_abs_innovation(Distribution::StudentT, 1e6) - 0.7978846) < 1e-5);
  // The closed form at nu = 3 reduces to 2 / pi.
  CHECK(expected_abs_innovation(Distribution::StudentT, 3.0) == Approx(2.0 / std::numbers::pi).epsilon(1e-13));
  for (double nu : {2.5, 3.0, 4.0, 6.0, 10.0, 30.0, 200.0}) {
    CHECK(expected_abs_innovation(Distribution::StudentT, nu) ==
          Approx(oracle::t_abs_moment_quadrature(nu)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(expected_abs_innovation(Distribution::StudentT, 2.0), Error);
}

TEST_CASE("unconditional variance and persistence", "[garch]") {
  CHECK(*unconditional_variance(spec_of(Family::Garch, 1, 0, 1), params_of(0, 0.05, {0.1}, {}, {0.85})) ==
        Approx(1.0).epsilon(1e-12));
  CHECK(*unconditional_variance(spec_of(Family::Gjr, 1, 1, 1), params_of(0, 0.05, {0.05}, {0.1}, {0.85})) ==
        Approx(1.0).epsilon(1e-12));
  try {
    unconditional_variance(spec_of(Family::Garch, 1, 0, 1), params_of(0, 0.05, {0.15}, {}, {0.85}));
    FAIL("unit persistence accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonStationary);
  }
  CHECK_FALSE(unconditional_variance(spec_of(Family::Egarch, 1, 1, 1), params_of(0, 0, {0.1}, {0}, {0.9})));
  CHECK_FALSE(unconditional_variance(spec_of(Family::Tgarch, 1, 1, 1), params_of(0, 0.1, {0.1}, {0}, {0.8})));
}

TEST_CASE("stationarity per family", "[garch]") {
  CHECK(is_stationary(spec_of(Family::Garch, 1, 0, 1), params_of(0, 0.05, {0.1}, {}, {0.85})));
  CHECK_FALSE(is_stationary(spec_of(Family::Garch, 1, 0, 1), params_of(0, 0.05, {0.2}, {}, {0.85})));
  CHECK(is_stationary(spec_of(Family::Egarch, 3, 1, 1), params_of(0, 0, {0.1, 0.1, 0.1}, {0}, {0.98})));
  CHECK_FALSE(is_stationary(spec_of(Family::Egarch, 1, 1, 2), params_of(0, 0, {0.1}, {0}, {0.7, 0.4})));
  // beta = (1.2, -0.3): roots of 1 - 1.2x + 0.3x^2 lie outside the unit circle.
  CHECK(is_stationary(spec_of(Family::Egarch, 1, 1, 2), params_of(0, 0, {0.1}, {0}, {1.2, -0.3})));
  const double ez = std::sqrt(2.0 / std::numbers::pi);
  CHECK(is_stationary(spec_of(Family::Tgarch, 1, 1, 1), params_of(0, 0.1, {0.1}, {0}, {0.9})));
  CHECK_FALSE(is_stationary(spec_of(Family::Tgarch, 1, 1, 1), params_of(0, 0.1, {0.2 / ez}, {0}, {0.81})));
}

TEST_CASE("log_likelihood is smooth in the parameters", "[garch][property]") {
  std::mt19937_64 rng(31);
  const auto r = random_returns(rng, 300);
  const std::vector<RandomModel> models{
      {spec_of(Family::Garch, 1, 0, 1, Distribution::StudentT), params_of(0.02, 0.05, {0.1}, {}, {0.85}, 6.0)},
      {spec_of(Family::Gjr, 2, 1, 1), params_of(-0.01, 0.05, {0.05, 0.02}, {0.1}, {0.8})},
      {spec_of(Family::Egarch, 1, 1, 1, Distribution::StudentT), params_of(0.0, -0.05, {0.15}, {-0.08}, {0.95}, 8.0)},
      {spec_of(Family::Tgarch, 2, 2, 1), params_of(0.01, 0.05, {0.06, 0.03}, {0.4, -0.2}, {0.9})},
  };
  for (const auto& m : models) {
    const double base = log_likelihood(m.spec, m.params, r);
    auto v = m.params.to_vector(m.spec);
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto at = [&](double h) {
        auto w = v;
        w[i] += h;
        return log_likelihood(m.spec, GarchParams::from_vector(m.spec, w), r) - base;
      };
      const double d1 = at(1e-7);
      const double d2 = at(2e-7);
      INFO(m.spec.label() << " coordinate " << i);
      CHECK(std::abs(d1) < 1e-3);
      // A kink or jump would break the linear scaling of small steps.
      CHECK(std::abs(d2 - 2.0 * d1) < 1e-8 + 1e-3 * std::abs(d1));
    }
  }
}
