#include <benchmark/benchmark.h>

#include "rabi/lindblad_engine.hpp"
#include "rabi/moment_hierarchy.hpp"
#include "rabi/regime_analysis.hpp"

namespace {

const rabi::RateSet kRates{1e-3, 1e-3, 0.0, 1e-3};

void BM_BuildLiouvillian(benchmark::State& state) {
  const rabi::SpaceDims dims(static_cast<int>(state.range(0)));
  const auto params = rabi::RabiParams::for_level(rabi::ModelLevel::full, 0.1);
  for (auto _ : state) {
    auto l = rabi::build_liouvillian(params, kRates, dims);
    benchmark::DoNotOptimize(l.matrix.nonZeros());
  }
  state.counters["dim2"] = static_cast<double>(dims.dim()) * dims.dim();
}
BENCHMARK(BM_BuildLiouvillian)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_PropagateFull(benchmark::State& state) {
  const rabi::SpaceDims dims(static_cast<int>(state.range(0)));
  const auto l = rabi::build_liouvillian(rabi::RabiParams::for_level(rabi::ModelLevel::full, 0.1), kRates, dims);
  const auto rho0 = rabi::DensityMatrix::from_initial_state(rabi::InitialState::fock(5), dims);
  const auto times = rabi::uniform_grid(200.0, 0.5);
  const auto obs = rabi::moment_observables(dims, std::vector<int>{1, 3, 5}, false);
  std::size_t evals = 0;
  for (auto _ : state) {
    auto ts = rabi::simulate_observables(l, rho0, times, obs, rabi::PropagationSettings{});
    evals = ts.metadata.monitors.rhs_evaluations;
    benchmark::DoNotOptimize(ts.columns.data());
  }
  state.counters["rhs_evals"] = static_cast<double>(evals);
}
BENCHMARK(BM_PropagateFull)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_PropagateRwa(benchmark::State& state) {
  const rabi::SpaceDims dims(30);
  const auto l = rabi::build_liouvillian(rabi::RabiParams::for_level(rabi::ModelLevel::rwa, 0.05), kRates, dims);
  const auto rho0 = rabi::DensityMatrix::from_initial_state(rabi::InitialState::fock(10), dims);
  const auto times = rabi::uniform_grid(5000.0, 1.0);
  const auto obs = rabi::moment_observables(dims, std::vector<int>{1, 3, 5}, false);
  for (auto _ : state) {
    auto ts = rabi::simulate_observables(l, rho0, times, obs, rabi::PropagationSettings{});
    benchmark::DoNotOptimize(ts.columns.data());
  }
}
BENCHMARK(BM_PropagateRwa)->Unit(benchmark::kMillisecond);

void BM_Hierarchy(benchmark::State& state) {
  const int n_cut = static_cast<int>(state.range(0));
  const auto h = rabi::build_hierarchy(rabi::RabiParams::for_level(rabi::ModelLevel::rwa, 0.05), kRates, n_cut);
  const auto x0 = rabi::initial_moments_from_state(rabi::InitialState::fock(10), n_cut);
  const auto times = rabi::uniform_grid(5000.0, 1.0);
  for (auto _ : state) {
    auto ts = rabi::integrate_hierarchy(h, x0, times, {});
    benchmark::DoNotOptimize(ts.columns.data());
  }
}
BENCHMARK(BM_Hierarchy)->Arg(15)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_SpectralScaling(benchmark::State& state) {
  const auto params = rabi::RabiParams::for_level(rabi::ModelLevel::rwa, 0.05);
  for (auto _ : state) {
    auto s = rabi::spectral_scaling(params, kRates, 2, 20);
    benchmark::DoNotOptimize(s.frequency.exponent);
  }
}
BENCHMARK(BM_SpectralScaling)->Unit(benchmark::kMicrosecond);

void BM_DominantFrequency(benchmark::State& state) {
  const auto t = rabi::uniform_grid(20000.0, 0.25);
  std::vector<double> y;
  for (double x : t) y.push_back(std::cos(0.1 * x));
  for (auto _ : state) {
    auto p = rabi::dominant_frequency(t, y);
    benchmark::DoNotOptimize(p.frequency);
  }
}
BENCHMARK(BM_DominantFrequency)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
