#include <benchmark/benchmark.h>

#include "gzsl/layers.hpp"
#include "gzsl/ops.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace {

using namespace gzsl;

ad::Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, bool rg = false) {
    std::vector<double> v(rows * cols);
    rng.fill_normal(v, 0.0, 1.0);
    return ad::Tensor::from_data({rows, cols}, std::move(v), rg);
}

void bench_matmul_forward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    ad::Tensor a = random_tensor(n, n, rng);
    ad::Tensor b = random_tensor(n, n, rng);
    for (auto _ : state) {
        ad::Tensor c = ad::matmul(a, b);
        benchmark::DoNotOptimize(c.data().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n * n * n);
}
BENCHMARK(bench_matmul_forward)->Arg(64)->Arg(128)->Arg(256);

void bench_affine_forward_backward(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    ad::DenseLayer layer = ad::make_dense(256, 128, ad::Activation::relu, rng);
    ad::Tensor x = random_tensor(batch, 256, rng);
    for (auto _ : state) {
        ad::Tensor loss = ad::mean_all(ad::forward_dense(layer, x));
        ad::backward(loss);
        benchmark::DoNotOptimize(layer.weight.grad().data());
    }
}
BENCHMARK(bench_affine_forward_backward)->Arg(16)->Arg(64)->Arg(256);

void bench_softmax_cross_entropy(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    ad::Tensor logits = random_tensor(batch, 50, rng, true);
    std::vector<std::uint32_t> labels(batch);
    for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<std::uint32_t>(rng.index(50));
    for (auto _ : state) {
        ad::Tensor loss = ad::softmax_cross_entropy(logits, labels);
        ad::backward(loss);
        benchmark::DoNotOptimize(loss.value());
    }
}
BENCHMARK(bench_softmax_cross_entropy)->Arg(64)->Arg(512);

} // namespace

BENCHMARK_MAIN();
