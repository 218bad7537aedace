#include <benchmark/benchmark.h>

#include <cstdint>

#include "skipmon/simulator.hpp"

using namespace skipmon;

namespace {

SimConfig config(std::size_t n, PricingScheme scheme, RetentionMode mode) {
  SimConfig c;
  c.n_initial = n;
  c.type_dist = Distribution::impatience_exponential(2.0);
  c.retention = RetentionModel::make(Distribution::exponential(3.0), 0.99);
  c.scheme = scheme;
  c.retention_mode = mode;
  c.max_rounds = 100;
  c.seed = 3;
  c.record_trajectories = false;
  return c;
}

void BM_SimulateMt(benchmark::State& state) {
  const auto mode = state.range(1) == 0 ? RetentionMode::Shared : RetentionMode::Independent;
  const auto c = config(static_cast<std::size_t>(state.range(0)), PricingScheme::myerson_threshold(), mode);
  std::int64_t rounds = 0;
  for (auto _ : state) {
    const auto r = run(c);
    benchmark::DoNotOptimize(r.discounted_revenue);
    rounds += static_cast<std::int64_t>(r.rounds_run);
  }
  // Agent-rounds at the initial population size; shared runs can end early.
  state.SetItemsProcessed(rounds * state.range(0));
}
BENCHMARK(BM_SimulateMt)->Args({10000, 0})->Args({10000, 1})->Args({100000, 0})->Unit(benchmark::kMillisecond);

void BM_SimulateKnownTypes(benchmark::State& state) {
  const auto c = config(static_cast<std::size_t>(state.range(0)), PricingScheme::known_types(),
                        RetentionMode::Independent);
  for (auto _ : state) benchmark::DoNotOptimize(run(c).discounted_revenue);
}
BENCHMARK(BM_SimulateKnownTypes)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
