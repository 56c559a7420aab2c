#include <benchmark/benchmark.h>

#include "kgaug/bicluster.hpp"
#include "kgaug/rng.hpp"

namespace {

kgaug::Matrix noisy_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    kgaug::Rng rng(seed);
    kgaug::Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.uniform();
    return m;
}

void BM_Msr(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = noisy_matrix(n, 8, 11);
    std::vector<std::uint32_t> rows(n), cols(8);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 0; j < 8; ++j) cols[j] = static_cast<std::uint32_t>(j);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kgaug::msr(m, rows, cols));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Msr)->RangeMultiplier(2)->Range(16, 512)->Complexity(benchmark::oN);

void BM_Mine(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = noisy_matrix(n, 8, 13);
    kgaug::MiningParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kgaug::mine(m, params));
    }
}
BENCHMARK(BM_Mine)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
