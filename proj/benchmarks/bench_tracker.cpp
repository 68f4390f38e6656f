#include "rodtrack/simulator.hpp"
#include "rodtrack/tracker.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

using namespace rodtrack;

const std::pair<Sequence, GroundTruthLineage>& colony(int seeds) {
    static std::map<int, std::pair<Sequence, GroundTruthLineage>> cache;
    auto it = cache.find(seeds);
    if (it == cache.end()) {
        SimConfig c;
        c.seed_count = seeds;
        c.frames = 40;
        c.seed_spread = 0.25;
        c.points_per_cell = 150;
        it = cache.emplace(seeds, simulate(c)).first;
    }
    return it->second;
}

void BM_TrackBaseline(benchmark::State& state) {
    const auto& seq = colony(static_cast<int>(state.range(0))).first;
    for (auto _ : state) benchmark::DoNotOptimize(track_sequence(seq, ScorerModel::baseline(), TrackerConfig{}));
}
BENCHMARK(BM_TrackBaseline)->Arg(1)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_TrackNeural(benchmark::State& state) {
    const auto& seq = colony(static_cast<int>(state.range(0))).first;
    const auto model = ScorerModel::neural(2, {64, 32}, 1);
    for (auto _ : state) benchmark::DoNotOptimize(track_sequence(seq, model, TrackerConfig{}));
}
BENCHMARK(BM_TrackNeural)->Arg(1)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    SimConfig c;
    c.seed_count = static_cast<int>(state.range(0));
    c.frames = 40;
    c.seed_spread = 0.25;
    c.points_per_cell = 150;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(c));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace
