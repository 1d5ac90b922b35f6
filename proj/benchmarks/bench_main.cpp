// Throughput of the hot paths: RNG, simulation, dependence calculus, estimators.

#include <benchmark/benchmark.h>

#include <cmath>

#include "locstat/dependence.hpp"
#include "locstat/empirical_process.hpp"
#include "locstat/estimators.hpp"
#include "locstat/process_models.hpp"
#include "locstat/rng.hpp"
#include "locstat/seminorm.hpp"

using namespace locstat;

namespace {

RecursiveModel tvar() {
  RecursiveModel m;
  m.a = Polynomial({0.2, 0.5});
  return m;
}

void BM_PhiloxUniform(benchmark::State& state) {
  CounterRng rng(1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform01());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxUniform);

void BM_SimulatePath(benchmark::State& state) {
  const RecursiveModel m = tvar();
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_path(m, n, ++seed).values.data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePath)->Arg(1000)->Arg(8000);

void BM_SimulateLinearPolynomial(benchmark::State& state) {
  LinearModel lin;
  lin.decay = DecayTemplate::polynomial;
  lin.rate = 2.5;
  lin.truncation_tol = 1e-5;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_path(lin, 2000, ++seed).values.data());
}
BENCHMARK(BM_SimulateLinearPolynomial);

void BM_DeltaProfile(benchmark::State& state) {
  const RecursiveModel m = tvar();
  const std::vector<std::size_t> lags{1, 2, 4, 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_delta_profile(m, 200, lags, 2.0, 500, default_index_set(200), 3));
  }
}
BENCHMARK(BM_DeltaProfile);

void BM_BetaPolynomial(benchmark::State& state) {
  const auto p = DecayProfile::polynomial(1.0, 2.0);
  std::uint64_t q = 1;
  for (auto _ : state) benchmark::DoNotOptimize(beta(p, q++ % 10000 + 1));
}
BENCHMARK(BM_BetaPolynomial);

void BM_ROfDelta(benchmark::State& state) {
  const auto p = DecayProfile::polynomial(1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(r_of_delta(p, 1e-3));
}
BENCHMARK(BM_ROfDelta);

void BM_VTilde(benchmark::State& state) {
  const auto p = DecayProfile::geometric(1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(v_tilde(1e-3, 1.0, p, 2.0));
}
BENCHMARK(BM_VTilde);

void BM_KernelRegression(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Path p = simulate_path(tvar(), n, 1);
  const double h = std::pow(double(n), -0.2);
  const auto grid = interior_grid(h, 41);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_regression(p.values, Kernel::epanechnikov(), h, grid));
}
BENCHMARK(BM_KernelRegression)->Arg(2000)->Arg(8000);

void BM_MEstimate(benchmark::State& state) {
  const Path p = simulate_path(tvar(), 4000, 1);
  const auto obj = MObjective::ar_least_squares();
  const auto grid = interior_grid(0.2, 9);
  for (auto _ : state) benchmark::DoNotOptimize(m_estimate(p, obj, Kernel::epanechnikov(), 0.2, grid));
}
BENCHMARK(BM_MEstimate);

void BM_MartingaleParts(benchmark::State& state) {
  const RecursiveModel m = tvar();
  const FunctionClass f{Base::kernel_density(0.0, 0.5), Factor::global()};
  const Path p = simulate_path(m, 1000, 2);
  const Centering c = mc_centering(f, m, 1000, 20, 3);
  for (auto _ : state) benchmark::DoNotOptimize(martingale_parts(f, p, m, c));
}
BENCHMARK(BM_MartingaleParts);

}  // namespace
BENCHMARK_MAIN();
