#include "rodtrack/scorer.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace rodtrack;

std::vector<CandidateAssociation> random_candidates(int count, int r) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<CandidateAssociation> out(static_cast<std::size_t>(count));
    for (auto& c : out) {
        c.feature.r = r;
        c.feature.values.resize(SpatiotemporalFeature::length_for(r));
        for (auto& v : c.feature.values) v = g(rng);
        c.distance = std::abs(g(rng));
    }
    return out;
}

void BM_ScoreNeural(benchmark::State& state) {
    const auto model = ScorerModel::neural(2, {64, 32}, 1);
    auto cands = random_candidates(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) {
        score(model, cands);
        benchmark::DoNotOptimize(cands.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreNeural)->RangeMultiplier(8)->Range(8, 4096);

void BM_ScoreBaseline(benchmark::State& state) {
    const auto model = ScorerModel::baseline(5.0);
    auto cands = random_candidates(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) {
        score(model, cands);
        benchmark::DoNotOptimize(cands.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreBaseline)->Arg(4096);

void BM_TrainEpoch(benchmark::State& state) {
    const auto cands = random_candidates(static_cast<int>(state.range(0)), 2);
    TrainingSet data;
    for (std::size_t k = 0; k < cands.size(); ++k) data.push_back({cands[k].feature, static_cast<int>(k % 4 == 0)});
    TrainHyper h;
    h.epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(train(data, h));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

} // namespace
