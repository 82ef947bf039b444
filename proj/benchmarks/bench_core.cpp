#include <benchmark/benchmark.h>

#include <random>

#include "optinstall/boundary.hpp"
#include "optinstall/estimate.hpp"
#include "optinstall/policy.hpp"
#include "zones.hpp"

using namespace optinstall;
using namespace optinstall::testing;

static void BM_PsiMoments(benchmark::State& state) {
  const auto z = north();
  const auto cfg = PsiConfig::from(z.model, z.econ);
  const double x = z.model.zeta + static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(psi_moments(x, cfg));
}
BENCHMARK(BM_PsiMoments)->Arg(-100)->Arg(0)->Arg(100)->Arg(1000);

static void BM_ConstantBoundary(benchmark::State& state) {
  const auto z = central_north();
  const auto cfg = PsiConfig::from(z.model, z.econ);
  for (auto _ : state) benchmark::DoNotOptimize(solve_constant_boundary(z.econ, z.model, cfg));
}
BENCHMARK(BM_ConstantBoundary);

static void BM_FreeBoundary(benchmark::State& state) {
  const auto z = north();
  const auto cfg = PsiConfig::from(z.model, z.econ);
  const double h = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_free_boundary(z.econ, z.model, cfg, h));
}
BENCHMARK(BM_FreeBoundary)->Arg(50)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_FitArx(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  std::vector<double> x(321), z(321);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = 100.0 + 30.0 * normal(gen);
    z[i] = 1000.0 + 10.0 * static_cast<double>(i) + 50.0 * normal(gen);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_arx1(x, {{SourceKind::photovoltaic, z}}));
}
BENCHMARK(BM_FitArx);

static void BM_PayoffNever(benchmark::State& state) {
  const auto z = north();
  SimOptions o;
  o.n_paths = static_cast<std::size_t>(state.range(0));
  o.seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(payoff_mc(z.model, z.econ, InstallationRule::never(), 100.0, 1000.0, o));
}
BENCHMARK(BM_PayoffNever)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_PayoffBoundary(benchmark::State& state) {
  const auto z = north();
  const auto fb = integrate_free_boundary(z.econ, z.model, PsiConfig::from(z.model, z.econ), 5.0);
  const auto rule = InstallationRule::boundary(fb);
  SimOptions o;
  o.n_paths = 200;
  o.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(payoff_mc(z.model, z.econ, rule, 60.0, 0.0, o));
}
BENCHMARK(BM_PayoffBoundary)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
