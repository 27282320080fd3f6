#include <benchmark/benchmark.h>

#include "pim/assembly.hpp"

namespace {

void BM_AssembleInterval(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cloud = pim::sample(pim::ManifoldModel::interval(0, 1), pim::DensitySpec::uniform(), n, 1);
  const double t = pim::default_bandwidth(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pim::assemble(cloud, pim::KernelSpec::wendland41(), t));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleInterval)->RangeMultiplier(2)->Range(500, 8000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_AssembleSphere(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cloud = pim::sample(pim::ManifoldModel::sphere(1), pim::DensitySpec::uniform(), n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pim::assemble(cloud, pim::KernelSpec::wendland41(), 0.02));
}
BENCHMARK(BM_AssembleSphere)->RangeMultiplier(2)->Range(1000, 8000)->Unit(benchmark::kMillisecond);

void BM_WField(benchmark::State& state) {
  const auto cloud = pim::sample(pim::ManifoldModel::circle(1), pim::DensitySpec::uniform(), 4000, 2);
  const auto queries = pim::sample(pim::ManifoldModel::circle(1), pim::DensitySpec::uniform(), 1000, 3).points;
  for (auto _ : state) benchmark::DoNotOptimize(pim::w_field(cloud, pim::KernelSpec::wendland41(), 0.01, queries));
}
BENCHMARK(BM_WField)->Unit(benchmark::kMillisecond);

}  // namespace
