#include <benchmark/benchmark.h>

#include <vector>

#include "vfdet/config.hpp"
#include "vfdet/emd.hpp"
#include "vfdet/feature_pipeline.hpp"
#include "vfdet/filters.hpp"
#include "vfdet/forest.hpp"
#include "vfdet/rng.hpp"
#include "vfdet/spectral.hpp"
#include "vfdet/svm.hpp"
#include "vfdet/synth.hpp"

namespace {

using namespace vfdet;

std::vector<double> noise_signal(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    return x;
}

void bm_dft(benchmark::State& state) {
    const auto x = noise_signal(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(dft(x));
}
BENCHMARK(bm_dft)->Arg(1250)->Arg(2048);

void bm_preprocess(benchmark::State& state) {
    const auto x = noise_signal(1250, 2);
    const PipelineConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(preprocess_pipeline(x, 250.0, cfg.filter_chain()));
}
BENCHMARK(bm_preprocess);

void bm_decompose(benchmark::State& state) {
    const auto episode = synth_vf_episode({}, 3);
    for (auto _ : state) benchmark::DoNotOptimize(decompose(episode.samples));
}
BENCHMARK(bm_decompose);

void bm_episode_features(benchmark::State& state) {
    const auto episode = synth_vf_episode({}, 4);
    const PipelineConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(compute_features(episode, cfg));
}
BENCHMARK(bm_episode_features);

Dataset blob_dataset(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    for (std::size_t i = 0; i < rows; ++i) {
        const int label = i % 2 ? +1 : -1;
        std::vector<double> row(dim);
        for (auto& v : row) v = 0.5 * label + 0.4 * rng.normal();
        data.append_row(row, label, "");
    }
    return data;
}

void bm_forest_train(benchmark::State& state) {
    const auto data = blob_dataset(200, 100, 5);
    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.jobs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(train_forest(data, cfg));
}
BENCHMARK(bm_forest_train)->Unit(benchmark::kMillisecond);

void bm_svm_train(benchmark::State& state) {
    const auto data = blob_dataset(200, 50, 6);
    SvmTrainConfig cfg;
    cfg.c = 10.0;
    cfg.gamma = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(train_svm(data, cfg));
}
BENCHMARK(bm_svm_train)->Unit(benchmark::kMillisecond);

void bm_svm_predict(benchmark::State& state) {
    const auto data = blob_dataset(200, 50, 7);
    SvmTrainConfig cfg;
    cfg.c = 10.0;
    cfg.gamma = 0.5;
    const SvmModel model = train_svm(data, cfg);
    const auto probe = noise_signal(50, 8);
    for (auto _ : state) benchmark::DoNotOptimize(predict(model, probe));
}
BENCHMARK(bm_svm_predict);

}  // namespace

BENCHMARK_MAIN();
