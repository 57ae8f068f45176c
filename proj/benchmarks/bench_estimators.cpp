#include "tfm/baseline.hpp"
#include "tfm/simulator.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace tfm;

SimDataset dataset(std::size_t T, std::size_t p) {
    SimConfig cfg;
    cfg.T = T;
    cfg.dims = {p, p, p};
    cfg.phi = 0.6;
    cfg.psi = 0.8;
    cfg.seed = 2024;
    return simulate_dataset(cfg);
}

void BM_ModeProduct(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const auto mode = static_cast<std::size_t>(state.range(1));
    Rng rng(1);
    DenseTensor x({p, p, p});
    for (auto& v : x.data()) v = rng.normal();
    const Matrix a = generate_loadings(p, 4, rng);
    for (auto _ : state) benchmark::DoNotOptimize(mode_product_transposed(x, mode, a));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_ModeProduct)->ArgsProduct({{20, 50, 100}, {0, 1, 2}});

void BM_ModeCovariance(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const SimDataset ds = dataset(20, p);
    for (auto _ : state) benchmark::DoNotOptimize(mode_covariance(ds.series, 2));
}
BENCHMARK(BM_ModeCovariance)->Arg(20)->Arg(50);

void BM_MoPCA(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const SimDataset ds = dataset(static_cast<std::size_t>(state.range(1)), p);
    for (auto _ : state) benchmark::DoNotOptimize(mopca_fit(ds.series, {2, 3, 4}));
}
BENCHMARK(BM_MoPCA)->Args({20, 20})->Args({50, 50})->Unit(benchmark::kMillisecond);

void BM_IPmoPCA(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const SimDataset ds = dataset(static_cast<std::size_t>(state.range(1)), p);
    std::size_t sweeps = 0;
    for (auto _ : state) {
        const FactorFit f = ipmopca_fit(ds.series, {2, 3, 4});
        sweeps = f.iterations;
        benchmark::DoNotOptimize(f.loadings.mats.data());
    }
    state.counters["sweeps"] = static_cast<double>(sweeps);
}
BENCHMARK(BM_IPmoPCA)->Args({20, 20})->Args({50, 50})->Unit(benchmark::kMillisecond);

void BM_ITipup(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const SimDataset ds = dataset(static_cast<std::size_t>(state.range(1)), p);
    for (auto _ : state) benchmark::DoNotOptimize(itipup_fit(ds.series, {2, 3, 4}).loadings.mats.data());
}
BENCHMARK(BM_ITipup)->Args({20, 20})->Args({50, 50})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
