#include <benchmark/benchmark.h>

#include "kgaug/tucker.hpp"

namespace {

kgaug::TuckerModel small_model(std::uint32_t m_e, std::uint32_t dim) {
    kgaug::TrainConfig cfg;
    cfg.entity_dim = dim;
    cfg.relation_dim = dim;
    cfg.seed = 3;
    return kgaug::init_model(m_e, 8, cfg);
}

void BM_ScoreAll(benchmark::State& state) {
    const auto dim = static_cast<std::uint32_t>(state.range(0));
    const auto model = small_model(256, dim);
    std::uint32_t s = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kgaug::score_all(model, s, s % 8));
        s = (s + 1) % 256;
    }
}
BENCHMARK(BM_ScoreAll)->Arg(32)->Arg(64)->Arg(128)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_LossAndGrads(benchmark::State& state) {
    const auto dim = static_cast<std::uint32_t>(state.range(0));
    const auto model = small_model(256, dim);
    kgaug::TrainConfig cfg;
    cfg.entity_dim = dim;
    cfg.relation_dim = dim;

    std::vector<kgaug::Query> batch;
    std::vector<std::vector<double>> targets;
    for (std::uint32_t b = 0; b < 32; ++b) {
        batch.push_back({b, b % 8});
        targets.emplace_back(model.m_e, 0.0);
        targets.back()[(b * 7) % model.m_e] = 1.0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(kgaug::loss_and_grads(model, batch, targets, cfg));
    }
}
BENCHMARK(BM_LossAndGrads)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
