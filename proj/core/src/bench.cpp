#include "sspd/bench.hpp"

#include "sspd/error.hpp"
#include "sspd/spectral_kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace sspd::eval {

namespace {

PointCloud random_planar_cloud(Eigen::Index count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd points(2, count);
    for (Eigen::Index j = 0; j < count; ++j) {
        points(0, j) = u(rng);
        points(1, j) = u(rng);
    }
    return PointCloud::euclidean(std::move(points));
}

template <class F>
double seconds(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

BenchRow summarize(int d, std::string method, std::vector<double> times) {
    BenchRow row{d, std::move(method), 0.0, 0.0, 0.0};
    for (double t : times) row.mean_seconds += t;
    row.mean_seconds /= static_cast<double>(times.size());
    double ss = 0.0;
    for (double t : times) ss += (t - row.mean_seconds) * (t - row.mean_seconds);
    row.std_seconds = times.size() > 1 ? std::sqrt(ss / static_cast<double>(times.size() - 1)) : 0.0;
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    row.median_seconds = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
    return row;
}

}  // namespace

BenchResult bench_series_vs_eigen(std::span<const int> sizes, int trials, std::uint64_t seed) {
    if (trials < 1) throw InvalidArgument("trials must be at least 1");
    for (int d : sizes)
        if (d < 8) throw InvalidArgument(fmt::format("benchmark sizes must be >= 8, got {}", d));

    const auto base = BaseKernelSpec::gaussian(0.1);
    std::mt19937_64 rng(seed);
    BenchResult result;
    for (int d : sizes) {
        std::vector<double> series_times, eigen_times;
        for (int trial = 0; trial < trials; ++trial) {
            const auto a = random_planar_cloud(d / 2, rng);
            const auto b = random_planar_cloud(d - d / 2, rng);
            const CenteredGram centered = mixture_gram(a, b, base);
            const double rho = spectrum(centered).front();
            const double delta = 0.5 / rho;

            SeriesKernelParams sp;
            sp.delta = delta;
            sp.max_terms = 256;
            IgvKernelParams ip;
            ip.eta = 1.0 / delta;

            double series_value = 0.0, eigen_value = 0.0;
            series_times.push_back(seconds([&] { series_value = series_kernel(centered, sp).value; }));
            eigen_times.push_back(seconds([&] { eigen_value = igv_kernel(centered, ip); }));
            result.max_abs_diff = std::max(result.max_abs_diff, std::abs(series_value - eigen_value));
        }
        result.rows.push_back(summarize(d, "series", std::move(series_times)));
        result.rows.push_back(summarize(d, "eigen", std::move(eigen_times)));
    }
    return result;
}

std::string bench_csv(const BenchResult& result) {
    std::string out = "d,method,mean_seconds,std_seconds\n";
    for (const auto& row : result.rows)
        out += fmt::format("{},{},{:.9g},{:.9g}\n", row.d, row.method, row.mean_seconds, row.std_seconds);
    return out;
}

}  // namespace sspd::eval
