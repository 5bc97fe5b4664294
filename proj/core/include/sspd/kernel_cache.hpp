#pragma once

#include "sspd/measures.hpp"
#include "sspd/spectral_kernels.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace sspd {

/// Binary kernel-matrix cache.
///
/// Layout (little endian): magic "SSPD", u32 version, u32 m, u32 kernel kind
/// (1 = tr, 2 = igv, 3 = series), then m * m float64 values in row-major
/// order. A JSON sidecar records the configuration and a dataset digest.
inline constexpr std::uint32_t kKernelCacheVersion = 1;

struct KernelCache {
    Eigen::MatrixXd matrix;
    KernelKind kind = KernelKind::Trace;
    std::uint32_t version = kKernelCacheVersion;
};

std::string encode_kernel_cache(const Eigen::MatrixXd& matrix, KernelKind kind);
KernelCache decode_kernel_cache(std::string_view bytes);

void write_kernel_cache(const std::filesystem::path& path, const Eigen::MatrixXd& matrix, KernelKind kind);
KernelCache read_kernel_cache(const std::filesystem::path& path);

/// FNV-1a 64-bit digest over the clouds' weights and coordinates (or item
/// ids), rendered as 16 hex digits.
std::string dataset_digest(std::span<const PointCloud> clouds);

nlohmann::json kernel_cache_sidecar(const KernelConfig& config, std::span<const PointCloud> clouds);

/// Row-major CSV with 17 significant digits.
std::string matrix_to_csv(const Eigen::MatrixXd& matrix);

}  // namespace sspd
