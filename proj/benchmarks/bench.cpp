#include <benchmark/benchmark.h>

#include "mednns/resnet.hpp"
#include "mednns/retrieval.hpp"
#include "mednns/rng.hpp"
#include "mednns/stats.hpp"
#include "mednns/supernet.hpp"
#include "mednns/tensor.hpp"

namespace {

using namespace mednns;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal());
    return t;
}

void bm_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const Tensor a = random_tensor({n, n}, rng);
    const Tensor b = random_tensor({n, n}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}
BENCHMARK(bm_matmul)->Arg(32)->Arg(64)->Arg(128);

void bm_conv_forward(benchmark::State& state) {
    Rng rng(2);
    const std::size_t c = static_cast<std::size_t>(state.range(0));
    const Tensor x = random_tensor({8, c, 16, 16}, rng);
    const Tensor w = random_tensor({c, c, 3, 3}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, 1));
}
BENCHMARK(bm_conv_forward)->Arg(8)->Arg(16);

void bm_supernet_forward(benchmark::State& state) {
    SearchSpace space;
    Rng rng(3);
    const ConvNet net = make_supernet(space, rng);
    const Tensor x = random_tensor({16, 1, 16, 16}, rng);
    const Mask mask = config_to_mask(space, config_at(space, 0));
    for (auto _ : state) benchmark::DoNotOptimize(subnet_forward(net, mask, x));
}
BENCHMARK(bm_supernet_forward);

void bm_fid(benchmark::State& state) {
    const std::size_t d = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    const Tensor fa = random_tensor({4 * d, d}, rng);
    const Tensor fb = random_tensor({4 * d, d}, rng);
    const GaussianStats a = fit_gaussian(fa);
    const GaussianStats b = fit_gaussian(fb);
    for (auto _ : state) benchmark::DoNotOptimize(fid(a, b));
}
BENCHMARK(bm_fid)->Arg(8)->Arg(32);

void bm_query(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(5);
    ModelIndex index;
    index.embeddings = random_tensor({n, 64}, rng);
    for (std::size_t r = 0; r < n; ++r) {
        double nrm = 0.0;
        for (std::size_t c = 0; c < 64; ++c) nrm += index.embeddings.at(r, c) * index.embeddings.at(r, c);
        const float inv = static_cast<float>(1.0 / std::sqrt(nrm));
        for (std::size_t c = 0; c < 64; ++c) index.embeddings.at(r, c) *= inv;
    }
    Tensor q = random_tensor({64}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(query(index, q, 10));
}
BENCHMARK(bm_query)->Arg(512)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
