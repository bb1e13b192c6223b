// Microbenchmarks for the hot paths: the matmul kernel, single-block
// contraction across bond dimensions, and a whole-model forward pass.

#include <benchmark/benchmark.h>

#include <cstddef>

#include "lotenet/feature_map.hpp"
#include "lotenet/model.hpp"
#include "lotenet/mps_block.hpp"
#include "lotenet/rng.hpp"
#include "lotenet/tensor.hpp"
#include "lotenet/tensor_ops.hpp"

using namespace lotenet;

namespace {

TensorF random_tensor(const Shape& shape, std::uint64_t seed) {
    Rng rng(seed);
    return TensorF::generate(shape, [&](std::size_t) { return float(rng.next_unit()); });
}

void bm_matmul(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(0));
    const TensorF a = random_tensor(Shape({n, n}), 1);
    const TensorF b = random_tensor(Shape({n, n}), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matmul(a, b));
    }
    state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(n * n * n));
}

void bm_block_contraction(benchmark::State& state) {
    const std::size_t bond = std::size_t(state.range(0));
    const std::size_t n_sites = 16;
    const std::size_t site_dim = 8;
    const auto block = MpsBlockF::init(n_sites, site_dim, bond, 2, 7);
    const EmbeddedPatchF patch{random_tensor(Shape({n_sites, site_dim}), 3)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(contract_block(block, patch));
    }
}

void bm_model_forward(benchmark::State& state) {
    LoTeNetConfig cfg;
    cfg.height = 128;
    cfg.width = 128;
    cfg.layers = 3;
    cfg.kernel = 2;
    cfg.bond_dim = std::size_t(state.range(0));
    cfg.out_dim = cfg.bond_dim;
    const auto model = LoTeNetModelF::init(cfg, 11);
    const TensorF image = random_tensor(Shape({cfg.height, cfg.width, cfg.channels}), 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(image));
    }
}

}  // namespace

BENCHMARK(bm_matmul)->Arg(64)->Arg(256);
BENCHMARK(bm_block_contraction)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(bm_model_forward)->Arg(2)->Arg(5);

BENCHMARK_MAIN();
