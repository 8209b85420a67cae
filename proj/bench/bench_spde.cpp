#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "spde/kernel.hpp"
#include "spde/rare_event.hpp"

using namespace spde;

namespace {

EventSpec projection_event(const GridSpec& g) {
  EventSpec e;
  e.profile = sample_profile(g, [](double x) { return std::numbers::sqrt2 * std::sin(std::numbers::pi * x); });
  e.level = 0.3;
  return e;
}

void BM_mc_parallel(benchmark::State& state) {
  const GridSpec g;
  const std::vector<double> eta(g.nx, 0.0);
  const Coefficients c = make_preset(PresetId::linear_heat);
  MCOptions o;
  o.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_probability(projection_event(g), eta, c, g, 0.5, 2000, 1, nullptr, o));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_mc_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_mc_reference(benchmark::State& state) {
  const GridSpec g;
  const std::vector<double> eta(g.nx, 0.0);
  const Coefficients c = make_preset(PresetId::linear_heat);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::estimate_probability(projection_event(g), eta, c, g, 0.5, 2000, 1, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_mc_reference)->Unit(benchmark::kMillisecond);

void BM_burgers_solve(benchmark::State& state) {
  GridSpec g;
  g.nx = static_cast<int>(state.range(0));
  const auto eta = sample_profile(g, [](double x) { return std::sin(std::numbers::pi * x); });
  const Coefficients c = make_preset(PresetId::burgers);
  SolveConfig cfg;
  cfg.epsilon = 0.1;
  const auto sheet = sample_sheet(g, 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve(eta, c, g, cfg, nullptr, &sheet));
}
BENCHMARK(BM_burgers_solve)->Arg(63)->Arg(255)->Unit(benchmark::kMicrosecond);

void BM_kernel_bounds(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel::check_kernel_bounds(kernel::KernelConfig{}, kernel::BoundSampling{16, 16, 0.2, 2.0, 1.0, 500}));
  }
}
BENCHMARK(BM_kernel_bounds)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
