#include <random>

#include <benchmark/benchmark.h>

#include "genprof/eval.hpp"

using namespace genprof;

namespace {

std::vector<ExecutionState> walk(std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 0.1);
    std::vector<ExecutionState> out;
    double a = 10.0, b = 1.0, c = 0.3;
    for (std::size_t k = 0; k < len; ++k) {
        a += step(rng);
        b += step(rng);
        c += step(rng);
        out.push_back(ExecutionState{{a, b, c}});
    }
    return out;
}

void BM_Dtw(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = walk(n, 1), y = walk(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(eval::normalized_dtw(x, y));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dtw)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

}  // namespace
