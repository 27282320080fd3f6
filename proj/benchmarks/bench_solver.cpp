#include <benchmark/benchmark.h>

#include <cmath>

#include "pim/analysis.hpp"
#include "pim/solver.hpp"

namespace {

pim::LaplacianSystem interval_system(std::size_t n, double t) {
  return pim::assemble(pim::sample(pim::ManifoldModel::interval(0, 1), pim::DensitySpec::uniform(), n, 42),
                       pim::KernelSpec::wendland41(), t);
}

void BM_SolveEigDense(benchmark::State& state) {
  const auto sys = interval_system(static_cast<std::size_t>(state.range(0)), 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(pim::solve_eig(sys, 6));
}
BENCHMARK(BM_SolveEigDense)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SolveEigIterative(benchmark::State& state) {
  const auto sys = interval_system(static_cast<std::size_t>(state.range(0)), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(pim::solve_eig(sys, 6));
}
BENCHMARK(BM_SolveEigIterative)->Arg(1000)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_SolvePoisson(benchmark::State& state) {
  const auto sys = interval_system(static_cast<std::size_t>(state.range(0)), 0.01);
  Eigen::VectorXd f(sys.cloud.points.rows());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = std::cos(3.141592653589793 * sys.cloud.points(i, 0));
  for (auto _ : state) benchmark::DoNotOptimize(pim::solve_poisson(sys, f));
}
BENCHMARK(BM_SolvePoisson)->Arg(1000)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_CoercivityConstant(benchmark::State& state) {
  const auto sys = interval_system(static_cast<std::size_t>(state.range(0)), 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(pim::coercivity_constant(sys));
}
BENCHMARK(BM_CoercivityConstant)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
