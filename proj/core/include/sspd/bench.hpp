#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sspd::eval {

struct BenchRow {
    int d = 0;
    std::string method;  // "series" or "eigen"
    double mean_seconds = 0.0;
    double std_seconds = 0.0;
    double median_seconds = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    /// Largest |k_M - k_0| over all timed instances.
    double max_abs_diff = 0.0;
};

/// Times k_M by truncated series against k_0 by symmetric eigenvalues on
/// random mixtures of two planar clouds with d points in total, using
/// delta = 1 / (2 rho) and eta = 1 / delta so both compute the same value.
/// Only the kernel stage is timed; the Gram matrix is built beforehand.
BenchResult bench_series_vs_eigen(std::span<const int> sizes, int trials, std::uint64_t seed = 7);

/// `d,method,mean_seconds,std_seconds`
std::string bench_csv(const BenchResult& result);

}  // namespace sspd::eval
