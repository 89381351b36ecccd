#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "editodds/evaluation.hpp"

namespace {

std::vector<editodds::ScoredLabel> random_labels(long k, bool coarse) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<editodds::ScoredLabel> data(static_cast<size_t>(k));
    for (auto& sl : data) {
        sl.score = coarse ? 0.01 * static_cast<double>(rng() % 101) : unit(rng);
        sl.positive = unit(rng) < 0.3;
    }
    data.front().positive = true;
    return data;
}

void bm_pr_curve(benchmark::State& state) {
    const auto data = random_labels(state.range(0), false);
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::pr_curve(data));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_pr_curve)->Range(1024, 1 << 20)->Unit(benchmark::kMicrosecond);

// Heavy score ties collapse the sweep into few steps; the sort still
// dominates but the step loop shrinks.
void bm_pr_curve_tied(benchmark::State& state) {
    const auto data = random_labels(state.range(0), true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::pr_curve(data));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_pr_curve_tied)->Range(1024, 1 << 20)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
