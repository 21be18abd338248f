#include <benchmark/benchmark.h>

#include "qkica/circuit.hpp"
#include "qkica/contrast.hpp"
#include "qkica/gram.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/rng.hpp"
#include "qkica/sources.hpp"
#include "qkica/spectral.hpp"

using namespace qkica;

namespace {

Vector normal_vector(Index n, std::uint64_t seed) {
    CounterRng rng(seed);
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
}

SampleMatrix whitened(Index m, Index n) {
    SourceSpec spec;
    spec.distributions.assign(static_cast<std::size_t>(m), Distribution::uniform());
    spec.n_samples = n;
    spec.seed = 1;
    return whiten(sample_sources(spec)).Y;
}

void BM_GramCentered(benchmark::State& state) {
    const Vector z = normal_vector(state.range(0), 1);
    for (auto _ : state) benchmark::DoNotOptimize(gram_pair(z, KernelSpec{}));
}
BENCHMARK(BM_GramCentered)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void decompose_with(benchmark::State& state, EigenSolver solver) {
    const Index n = state.range(0);
    const Matrix k = gram_center(gram_raw(normal_vector(n, 2), KernelSpec{}));
    for (auto _ : state) benchmark::DoNotOptimize(decompose(k, n, 0.02, solver));
}

void BM_DecomposeDense(benchmark::State& state) { decompose_with(state, EigenSolver::Dense); }
void BM_DecomposeSubspace(benchmark::State& state) { decompose_with(state, EigenSolver::Subspace); }
BENCHMARK(BM_DecomposeDense)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecomposeSubspace)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_ContrastPipeline(benchmark::State& state) {
    const SampleMatrix z = whitened(state.range(0), state.range(1));
    ContrastOptions o;
    for (auto _ : state) benchmark::DoNotOptimize(contrast_pipeline(z, o));
}
BENCHMARK(BM_ContrastPipeline)->Args({2, 500})->Args({3, 1000})->Args({4, 1000})->Unit(benchmark::kMillisecond);

void BM_BlockEncoding(benchmark::State& state) {
    CircuitLayout l;
    l.n = static_cast<int>(state.range(0));
    l.s = 8;
    const Vector z = normal_vector(l.samples(), 3);
    for (auto _ : state) benchmark::DoNotOptimize(verify_block_encoding(z, l, KernelSpec{}));
}
BENCHMARK(BM_BlockEncoding)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
