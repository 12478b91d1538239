#include <benchmark/benchmark.h>

#include "polsar/assessment.hpp"

namespace {

polsar::Scenario bench_scenario() {
  return polsar::make_scenario(15.0, 21.0, 10.0, -5.0, {0.605, 0.27, 0.125});
}

void BM_SamplesParallel(benchmark::State& state) {
  const auto t = polsar::assemble(polsar::scenario_to_params(bench_scenario()));
  const polsar::SpeckleConfig cfg{49, 3, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(polsar::batch_samples(t, static_cast<int>(state.range(0)), cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SamplesSerial(benchmark::State& state) {
  const auto t = polsar::assemble(polsar::scenario_to_params(bench_scenario()));
  const polsar::SpeckleConfig cfg{49, 3, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        polsar::batch_samples_serial(t, static_cast<int>(state.range(0)), cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrialsParallel(benchmark::State& state) {
  const polsar::SpeckleConfig cfg{49, 3, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        polsar::run_trials(bench_scenario(), static_cast<int>(state.range(0)), cfg, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrialsSerial(benchmark::State& state) {
  const polsar::SpeckleConfig cfg{49, 3, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        polsar::run_trials_serial(bench_scenario(), static_cast<int>(state.range(0)), cfg, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SamplesParallel)->Arg(10000)->UseRealTime();
BENCHMARK(BM_SamplesSerial)->Arg(10000)->UseRealTime();
BENCHMARK(BM_TrialsParallel)->Arg(200)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsSerial)->Arg(200)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
