#include "sspd/kernel_cache.hpp"

#include "sspd/cloud_io.hpp"
#include "sspd/error.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace sspd {
namespace {


template <class T>
void put_le(std::string& out, T value) {
    auto bits = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

template <class T>
T get_le(std::string_view bytes, std::size_t offset) {
    using Bits = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    Bits bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<Bits>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    return std::bit_cast<T>(bits);
}

class Fnv1a {
public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    template <class T>
    void value(T v) {
        std::string buf;
        put_le(buf, v);
        bytes(buf.data(), buf.size());
    }
    [[nodiscard]] std::uint64_t digest() const noexcept { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string encode_kernel_cache(const Eigen::MatrixXd& matrix, KernelKind kind) {
    if (matrix.rows() != matrix.cols()) throw InvalidArgument("kernel matrix must be square");
    const auto m = static_cast<std::uint32_t>(matrix.rows());
    std::string out = "SSPD";
    put_le(out, kKernelCacheVersion);
    put_le(out, m);
    put_le(out, static_cast<std::uint32_t>(kind));
    out.reserve(16 + 8 * static_cast<std::size_t>(m) * m);
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) put_le(out, matrix(i, j));
    return out;
}

KernelCache decode_kernel_cache(std::string_view bytes) {
    if (bytes.size() < 16 || bytes.substr(0, 4) != "SSPD") throw FormatError("not a kernel cache (bad magic)");
    KernelCache cache;
    cache.version = get_le<std::uint32_t>(bytes, 4);
    if (cache.version != kKernelCacheVersion)
        throw FormatError(fmt::format("unsupported kernel cache version {}", cache.version));
    const auto m = get_le<std::uint32_t>(bytes, 8);
    const auto kind = get_le<std::uint32_t>(bytes, 12);
    if (kind < 1 || kind > 3) throw FormatError(fmt::format("unknown kernel kind {}", kind));
    cache.kind = static_cast<KernelKind>(kind);
    const std::size_t expected = 16 + 8 * static_cast<std::size_t>(m) * m;
    if (bytes.size() != expected)
        throw FormatError(fmt::format("kernel cache has {} bytes, expected {}", bytes.size(), expected));
    cache.matrix.resize(m, m);
    std::size_t offset = 16;
    for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t j = 0; j < m; ++j, offset += 8) cache.matrix(i, j) = get_le<double>(bytes, offset);
    return cache;
}

void write_kernel_cache(const std::filesystem::path& path, const Eigen::MatrixXd& matrix, KernelKind kind) {
    const std::string bytes = encode_kernel_cache(matrix, kind);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(fmt::format("cannot write '{}'", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

KernelCache read_kernel_cache(const std::filesystem::path& path) {
    return decode_kernel_cache(read_text_file(path));
}

std::string dataset_digest(std::span<const PointCloud> clouds) {
    Fnv1a h;
    h.value(static_cast<std::uint64_t>(clouds.size()));
    for (const auto& cloud : clouds) {
        h.value(static_cast<std::uint32_t>(cloud.mode()));
        h.value(static_cast<std::uint64_t>(cloud.size()));
        h.value(static_cast<std::uint64_t>(cloud.dim()));
        for (Eigen::Index i = 0; i < cloud.size(); ++i) {
            h.value(cloud.weights()(i));
            if (cloud.mode() == PointMode::Opaque)
                h.value(cloud.items()[static_cast<std::size_t>(i)].id);
            else
                for (Eigen::Index k = 0; k < cloud.dim(); ++k) h.value(cloud.points()(k, i));
        }
    }
    return fmt::format("{:016x}", h.digest());
}

nlohmann::json kernel_cache_sidecar(const KernelConfig& config, std::span<const PointCloud> clouds) {
    nlohmann::json doc;
    doc["format"] = "SSPD";
    doc["version"] = kKernelCacheVersion;
    doc["m"] = clouds.size();
    doc["kernel_kind"] = static_cast<std::uint32_t>(config.kind());
    doc["config"] = to_json(config);
    doc["dataset_digest"] = dataset_digest(clouds);
    return doc;
}

std::string matrix_to_csv(const Eigen::MatrixXd& matrix) {
    std::string out;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (j) out += ',';
            out += fmt::format("{:.17g}", matrix(i, j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace sspd
