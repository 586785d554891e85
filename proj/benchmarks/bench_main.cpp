#include <benchmark/benchmark.h>

#include <map>

#include "fixtures.hpp"
#include "panda/augment.hpp"
#include "panda/decompose.hpp"
#include "panda/metrics.hpp"

using namespace panda;

namespace {

const Dataset& scene(int width, int height) {
    static std::map<std::pair<int, int>, Dataset> cache;
    auto& ds = cache[{width, height}];
    if (ds.samples.empty()) ds = testing::toy_dataset(1, 3, width, height);
    return ds;
}

void BM_Compose(benchmark::State& state) {
    const int w = static_cast<int>(state.range(0)), h = w / 2;
    const Dataset& ds = scene(w, h);
    const auto segs = extract_segments(ds.samples[0], ds.categories).segments;
    for (auto _ : state) {
        RngStream rng(1);
        benchmark::DoNotOptimize(compose(segs, {w, h}, rng));
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_Compose)->Arg(256)->Arg(1024)->Arg(2048);

void BM_AugmentSample(benchmark::State& state) {
    const int w = static_cast<int>(state.range(0)), h = w / 2;
    const Dataset& ds = scene(w, h);
    AugmentConfig cfg;
    std::uint64_t copy = 1;
    for (auto _ : state) benchmark::DoNotOptimize(augment_sample(ds.samples[0], ds.categories, cfg, copy++));
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_AugmentSample)->Arg(256)->Arg(1024)->Arg(2048);

void BM_PqAccumulate(benchmark::State& state) {
    const int w = static_cast<int>(state.range(0)), h = w / 2;
    const Dataset& ds = scene(w, h);
    const auto pred = augment_sample(ds.samples[0], ds.categories, AugmentConfig{}, 1).sample;
    for (auto _ : state) {
        PqStat acc;
        match_and_accumulate(pred, ds.samples[0], acc);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_PqAccumulate)->Arg(256)->Arg(1024)->Arg(2048);

}  // namespace
BENCHMARK_MAIN();
