#include <benchmark/benchmark.h>

#include "genprof/dense_oracle.hpp"
#include "genprof/solver.hpp"

using namespace genprof;

namespace {

// One Gauss-Seidel sweep at fixed N; args are {n_s, N}.
void BM_SinkhornSweep(benchmark::State& state) {
    const auto ns = static_cast<std::size_t>(state.range(0));
    const auto n = static_cast<std::size_t>(state.range(1));
    const auto inst = random_instance(ns, n, 7);
    SinkhornIteration it(inst.cost, inst.weights, SolverConfig{});
    for (auto _ : state) benchmark::DoNotOptimize(it.sweep());
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SinkhornSweep)
    ->ArgsProduct({{2, 4, 8, 16, 32}, {200}})
    ->Args({8, 500})
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oN);

void BM_UnimarginalProjection(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto inst = random_instance(6, n, 3);
    const auto sol = sinkhorn_solve(inst.cost, inst.weights, SolverConfig{0.1, 1e-10, 10000, 0});
    for (auto _ : state) benchmark::DoNotOptimize(sol.unimarginal(3));
}
BENCHMARK(BM_UnimarginalProjection)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_BimarginalProjection(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto inst = random_instance(6, n, 3);
    const auto sol = sinkhorn_solve(inst.cost, inst.weights, SolverConfig{0.1, 1e-10, 10000, 0});
    for (auto _ : state) benchmark::DoNotOptimize(sol.bimarginal(2, 3));
}
BENCHMARK(BM_BimarginalProjection)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_FullSolve(benchmark::State& state) {
    const auto inst = random_instance(5, static_cast<std::size_t>(state.range(0)), 9);
    for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_solve(inst.cost, inst.weights, SolverConfig{}));
}
BENCHMARK(BM_FullSolve)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
