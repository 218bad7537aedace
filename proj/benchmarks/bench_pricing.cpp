#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "skipmon/distribution.hpp"
#include "skipmon/repeat_pricing.hpp"
#include "skipmon/rng.hpp"
#include "skipmon/single_task.hpp"
#include "skipmon/value_function.hpp"

using namespace skipmon;

namespace {

std::vector<double> sorted_sample(std::size_t n) {
  Rng rng(1);
  auto xs = Distribution::impatience_exponential(2.0).sample(rng, n);
  std::sort(xs.begin(), xs.end());
  return xs;
}

void BM_EmpiricalMyerson(benchmark::State& state) {
  const auto types = sorted_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(empirical_myerson_from_types(types, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmpiricalMyerson)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_MyersonPriceClosedLaw(benchmark::State& state) {
  const auto m = marginal_value_dist(Distribution::impatience_exponential(3.0), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(myerson_price(m));
}
BENCHMARK(BM_MyersonPriceClosedLaw);

void BM_ThresholdPrice(benchmark::State& state) {
  const auto rm = RetentionModel::make(Distribution::lomax(3.0), 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(retention_threshold_price(rm, 1.0));
}
BENCHMARK(BM_ThresholdPrice);

void BM_OptimalPrice(benchmark::State& state) {
  const auto types = Distribution::uniform_unit();
  const auto vf = ValueFunction::clinear(1.0, types);
  const OptimizeOptions opt{static_cast<std::size_t>(state.range(0)), 1e-6};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_price(Objective::Revenue, types, vf, opt));
}
BENCHMARK(BM_OptimalPrice)->Arg(1000)->Arg(10000);

void BM_KnownTypesExpectedRevenue(benchmark::State& state) {
  const auto types = Distribution::impatience_exponential(2.0);
  const auto rm = RetentionModel::make(Distribution::exponential(3.0), 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(known_types_expected_revenue(types, 1.0, rm));
}
BENCHMARK(BM_KnownTypesExpectedRevenue);

}  // namespace
