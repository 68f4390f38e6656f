#include "rodtrack/matcher.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

namespace {

using namespace rodtrack;

/// m sources and targets on a line, each source linked to its k nearest targets.
AssignmentProblem banded_problem(int m, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    AssignmentProblem p;
    for (int i = 1; i <= m; ++i) {
        p.source_ids.push_back(i);
        p.target_ids.push_back(i);
    }
    for (int i = 1; i <= m; ++i)
        for (int d = 0; d < std::min(k, m); ++d) {
            const int j = 1 + (i - 1 + d) % m;
            p.candidates.push_back({i, j, u(rng)});
        }
    return p;
}

void BM_Algorithm1(benchmark::State& state) {
    const auto p = banded_problem(static_cast<int>(state.range(0)), 4, 1);
    for (auto _ : state) benchmark::DoNotOptimize(match_algorithm1(p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Algorithm1)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_GreedySorted(benchmark::State& state) {
    const auto p = banded_problem(static_cast<int>(state.range(0)), 4, 1);
    for (auto _ : state) benchmark::DoNotOptimize(match_greedy_sorted(p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GreedySorted)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_BruteForce(benchmark::State& state) {
    const auto p = banded_problem(static_cast<int>(state.range(0)), 3, 1);
    for (auto _ : state) benchmark::DoNotOptimize(match_bruteforce(p));
}
BENCHMARK(BM_BruteForce)->DenseRange(2, 6, 2);

} // namespace
