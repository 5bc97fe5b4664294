#include "sspd/gram.hpp"
#include "sspd/spectral_kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace sspd;

namespace {

PointCloud planar(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd p(2, n);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
    return PointCloud::euclidean(std::move(p));
}

// Mixture of two clouds with d points in total; delta = 1 / (2 rho).
struct Instance {
    CenteredGram gram;
    double delta;

    explicit Instance(Eigen::Index d)
        : gram([&] {
              std::mt19937_64 rng(7);
              return mixture_gram(planar(rng, d / 2), planar(rng, d - d / 2), BaseKernelSpec::gaussian(0.1));
          }()),
          delta(0.5 / spectrum(gram).front()) {}
};

}  // namespace

static void BM_Series(benchmark::State& state) {
    const Instance inst(state.range(0));
    SeriesKernelParams p;
    p.delta = inst.delta;
    p.max_terms = 256;
    for (auto _ : state) benchmark::DoNotOptimize(series_kernel(inst.gram, p));
}
BENCHMARK(BM_Series)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

static void BM_IgvEigen(benchmark::State& state) {
    const Instance inst(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(igv_kernel(inst.gram, {1.0 / inst.delta, DeterminantMethod::Eigen}));
}
BENCHMARK(BM_IgvEigen)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

static void BM_IgvCholesky(benchmark::State& state) {
    const Instance inst(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(igv_kernel(inst.gram, {1.0 / inst.delta, DeterminantMethod::Cholesky}));
}
BENCHMARK(BM_IgvCholesky)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

static void BM_Trace(benchmark::State& state) {
    const Instance inst(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(trace_kernel(inst.gram, {0.1}));
}
BENCHMARK(BM_Trace)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_MixtureGram(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const auto a = planar(rng, state.range(0) / 2);
    const auto b = planar(rng, state.range(0) / 2);
    const auto base = BaseKernelSpec::gaussian(0.1);
    for (auto _ : state) benchmark::DoNotOptimize(mixture_gram(a, b, base));
}
BENCHMARK(BM_MixtureGram)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

// MNIST-sized kernel matrix: m clouds of 40 points.
static void BM_KernelMatrix(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < state.range(0); ++i) clouds.push_back(planar(rng, 40));
    const auto config = KernelConfig::series(1.0, BaseKernelSpec::gaussian(0.1));
    KernelMatrixOptions opts;
    opts.jobs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(clouds, config, opts));
    state.counters["pairs"] = double(state.range(0) * (state.range(0) + 1) / 2);
}
BENCHMARK(BM_KernelMatrix)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
