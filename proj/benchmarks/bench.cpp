#include <fxvol/estimator.hpp>
#include <fxvol/forecaster.hpp>
#include <fxvol/garch.hpp>
#include <fxvol/ivmodel.hpp>
#include <fxvol/simulate.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace fxvol;

GarchSpec spec_of(Family f, int p, int o, int q, Distribution d) {
  GarchSpec s;
  s.family = f;
  s.p = p;
  s.o = o;
  s.q = q;
  s.dist = d;
  return s;
}

GarchParams gjr_params() {
  GarchParams p;
  p.omega = 0.05;
  p.alpha = {0.05};
  p.gamma = {0.15};
  p.beta = {0.85};
  p.nu = 6.0;
  return p;
}

const std::vector<double>& sample(std::size_t n) {
  static const auto path =
      simulate(spec_of(Family::Gjr, 1, 1, 1, Distribution::StudentT), gjr_params(), 5000, 7).returns;
  static std::vector<double> cut;
  cut.assign(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(n));
  return cut;
}

void BM_LogLikelihood(benchmark::State& state) {
  const auto family = static_cast<Family>(state.range(0));
  const auto spec = spec_of(family, 1, family == Family::Garch ? 0 : 1, 1, Distribution::StudentT);
  auto params = gjr_params();
  if (family == Family::Garch) params.gamma.clear();
  if (family == Family::Egarch) {
    params.omega = 0.0;
    params.alpha = {0.1};
    params.gamma = {-0.05};
    params.beta = {0.95};
  }
  const auto r = sample(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(spec, params, r));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_LogLikelihood)
    ->ArgsProduct({{static_cast<long>(Family::Garch), static_cast<long>(Family::Egarch), static_cast<long>(Family::Gjr),
                    static_cast<long>(Family::Tgarch)},
                   {200, 1000, 5000}});

void BM_Fit(benchmark::State& state) {
  const auto spec = spec_of(Family::Gjr, 1, 1, 1, Distribution::StudentT);
  const auto r = sample(static_cast<std::size_t>(state.range(0)));
  OptimizerConfig config;
  config.restarts = 0;
  config.std_errors = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, std::span<const double>(r), config).loglik);
}
BENCHMARK(BM_Fit)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MonteCarloForecast(benchmark::State& state) {
  const auto spec = spec_of(Family::Tgarch, 1, 1, 1, Distribution::StudentT);
  GarchParams p;
  p.omega = 0.05;
  p.alpha = {0.08};
  p.gamma = {0.3};
  p.beta = {0.88};
  p.nu = 6.0;
  const LagState lags{{-1.2}, {1.1}};
  MonteCarloOptions mc;
  mc.paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(variance_path_forecast(spec, p, lags, 20, mc));
}
BENCHMARK(BM_MonteCarloForecast)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_ImpliedVol(benchmark::State& state) {
  const BsInputs in{105.0, 100.0, 0.02, 0.5, 0.0};
  const double price = bs_call_price({105.0, 100.0, 0.02, 0.5, 0.23});
  for (auto _ : state) benchmark::DoNotOptimize(implied_vol(price, in));
}
BENCHMARK(BM_ImpliedVol);

}  // namespace

BENCHMARK_MAIN();
