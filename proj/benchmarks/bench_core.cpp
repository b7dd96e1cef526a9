#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "eclat/config.hpp"
#include "eclat/hungarian.hpp"
#include "eclat/latency.hpp"
#include "eclat/optimizer.hpp"
#include "eclat/projection.hpp"
#include "eclat/simulator.hpp"

namespace {

using namespace eclat;

const ExperimentConfig& testbed_config() {
  static const ExperimentConfig cfg = load_config(ECLAT_CONFIG_DIR "/testbed_scale.json");
  return cfg;
}

const DesignPoint& testbed_design() {
  static const DesignPoint design = initial_design(testbed_config().instance, testbed_config().opt);
  return design;
}

void BM_Hungarian(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EdgeWeightMatrix m(size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) m.at(r, c) = unit(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(hungarian_assign(m));
  state.SetComplexityN(size);
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_CappedSimplexProjection(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> base(size);
  for (double& v : base) v = noise(rng);
  std::vector<double> y(size);
  for (auto _ : state) {
    y = base;
    project_capped_simplex(y, 1.0, static_cast<double>(size) / 4.0);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CappedSimplexProjection)->RangeMultiplier(4)->Range(8, 8192)->Complexity();

void BM_ObjectiveValue(benchmark::State& state) {
  const ObjectiveModel model(testbed_config().instance);
  for (auto _ : state) benchmark::DoNotOptimize(model.value(testbed_design()));
}
BENCHMARK(BM_ObjectiveValue);

void BM_ObjectiveGradient(benchmark::State& state) {
  const ObjectiveModel model(testbed_config().instance);
  for (auto _ : state) benchmark::DoNotOptimize(model.gradient(testbed_design()));
}
BENCHMARK(BM_ObjectiveGradient);

void BM_PlacementPass(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_placement(testbed_config().instance, testbed_design(), testbed_config().opt));
  }
}
BENCHMARK(BM_PlacementPass)->Unit(benchmark::kMillisecond);

void BM_JlwoTestbedScale(benchmark::State& state) {
  std::size_t iterations = 0;
  for (auto _ : state) {
    const OptResult run = jlwo_run(testbed_config().instance, std::nullopt, testbed_config().opt);
    iterations += run.trace.iterations.size();
  }
  state.counters["outer_iterations"] =
      benchmark::Counter(static_cast<double>(iterations), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_JlwoTestbedScale)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  SimConfig sim = testbed_config().sim;
  sim.max_requests = static_cast<std::uint64_t>(state.range(0));
  sim.horizon_s = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(testbed_config().instance, testbed_design(), sim));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
