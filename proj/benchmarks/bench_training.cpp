#include <benchmark/benchmark.h>

#include <random>

#include "editodds/logistic.hpp"
#include "editodds/parallel.hpp"
#include "editodds/training.hpp"

namespace {

editodds::Dataset planted_dataset(int n, int m, long k) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> s(static_cast<size_t>(n));
    std::vector<double> d(static_cast<size_t>(m));
    for (auto& v : s) v = normal(rng);
    for (auto& v : d) v = normal(rng);

    editodds::Dataset ds;
    for (int u = 0; u < n; ++u) ds.users.add("u" + std::to_string(u));
    for (int i = 0; i < m; ++i) ds.items.add("i" + std::to_string(i));
    for (long r = 0; r < k; ++r) {
        const int u = static_cast<int>(rng() % n);
        const int i = static_cast<int>(rng() % m);
        const double p =
            editodds::logistic(s[static_cast<size_t>(u)] - d[static_cast<size_t>(i)] + 0.7);
        ds.observations.push_back({u, i, unit(rng) < p ? 1.0 : 0.0, r});
    }
    ds.recount();
    return ds;
}

void bm_epoch(benchmark::State& state, editodds::Variant variant) {
    const editodds::Dataset ds = planted_dataset(200, 100, 50000);
    editodds::TrainConfig cfg;
    cfg.variant = variant;
    cfg.dim = 20;
    cfg.epochs = 1;
    cfg.batch_size = 1024;
    const int threads = static_cast<int>(state.range(0));
    editodds::ThreadPool pool(threads);
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::sgd_fit(ds, cfg, &pool));
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}

void bm_epoch_basic(benchmark::State& state) { bm_epoch(state, editodds::Variant::basic); }
void bm_epoch_full(benchmark::State& state) { bm_epoch(state, editodds::Variant::full); }
BENCHMARK(bm_epoch_basic)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_epoch_full)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void bm_gradient_basic(benchmark::State& state) {
    const editodds::Dataset ds = planted_dataset(200, 100, static_cast<long>(state.range(0)));
    editodds::BasicParams params;
    params.s.assign(200, 0.1);
    params.d.assign(100, -0.1);
    const editodds::Params p{params};
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::gradient(p, ds.observations, 1e-4));
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(bm_gradient_basic)->Range(1024, 65536)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
