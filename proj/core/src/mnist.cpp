#include "sspd/mnist.hpp"

#include "sspd/cloud_io.hpp"
#include "sspd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace sspd::eval {
namespace {

std::uint32_t read_be32(std::string_view bytes, std::size_t offset, std::string_view what) {
    if (bytes.size() < offset + 4) throw FormatError(fmt::format("{}: truncated header", what));
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
    return v;
}

}  // namespace

std::vector<LabeledImage> parse_mnist_idx(std::string_view image_bytes, std::string_view label_bytes) {
    if (read_be32(image_bytes, 0, "image file") != kIdxImageMagic)
        throw FormatError(fmt::format("image file: bad magic 0x{:08x}", read_be32(image_bytes, 0, "image file")));
    if (read_be32(label_bytes, 0, "label file") != kIdxLabelMagic)
        throw FormatError(fmt::format("label file: bad magic 0x{:08x}", read_be32(label_bytes, 0, "label file")));

    const std::uint32_t count = read_be32(image_bytes, 4, "image file");
    const std::uint32_t rows = read_be32(image_bytes, 8, "image file");
    const std::uint32_t cols = read_be32(image_bytes, 12, "image file");
    const std::uint32_t label_count = read_be32(label_bytes, 4, "label file");
    if (count != label_count)
        throw FormatError(fmt::format("{} images but {} labels", count, label_count));

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    const std::size_t image_size = 16 + pixels * count;
    if (image_bytes.size() != image_size)
        throw FormatError(fmt::format("image file has {} bytes, header implies {}", image_bytes.size(), image_size));
    if (label_bytes.size() != 8 + static_cast<std::size_t>(count))
        throw FormatError(fmt::format("label file has {} bytes, header implies {}", label_bytes.size(), 8 + count));

    std::vector<LabeledImage> out(count);
    for (std::uint32_t n = 0; n < count; ++n) {
        auto& item = out[n];
        item.label = static_cast<unsigned char>(label_bytes[8 + n]);
        item.image.rows = static_cast<int>(rows);
        item.image.cols = static_cast<int>(cols);
        item.image.pixels.resize(pixels);
        const char* src = image_bytes.data() + 16 + static_cast<std::size_t>(n) * pixels;
        for (std::size_t p = 0; p < pixels; ++p)
            item.image.pixels[p] = static_cast<unsigned char>(src[p]) / 255.0;
    }
    return out;
}

std::vector<LabeledImage> load_mnist_idx(const std::filesystem::path& images_path,
                                         const std::filesystem::path& labels_path) {
    return parse_mnist_idx(read_text_file(images_path), read_text_file(labels_path));
}

std::vector<LabeledImage> take_per_class(const std::vector<LabeledImage>& images, int per_class) {
    std::map<int, int> taken;
    std::vector<LabeledImage> out;
    for (const auto& item : images) {
        if (taken[item.label] < per_class) {
            ++taken[item.label];
            out.push_back(item);
        }
    }
    return out;
}

PointCloud sample_cloud(const GrayImage& image, int m, double threshold, std::uint64_t seed, SamplingLaw law) {
    if (m < 1) throw InvalidArgument(fmt::format("sample size must be >= 1, got {}", m));
    if (!(threshold >= 0.0 && threshold < 1.0))
        throw InvalidArgument(fmt::format("threshold must lie in [0, 1), got {}", threshold));

    std::vector<std::size_t> ink;
    for (std::size_t p = 0; p < image.pixels.size(); ++p)
        if (image.pixels[p] > threshold) ink.push_back(p);
    if (ink.empty()) throw EmptyImageError(fmt::format("no pixel brighter than {}", threshold));

    const auto take = std::min(ink.size(), static_cast<std::size_t>(m));
    if (take < ink.size()) {
        std::mt19937_64 rng(seed);
        if (law == SamplingLaw::Uniform) {
            // Partial Fisher-Yates.
            for (std::size_t i = 0; i < take; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, ink.size() - 1);
                std::swap(ink[i], ink[pick(rng)]);
            }
        } else {
            // Efraimidis-Spirakis: the m largest keys log(u) / intensity are
            // a weighted sample without replacement.
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<std::pair<double, std::size_t>> keyed;
            keyed.reserve(ink.size());
            for (auto p : ink) keyed.emplace_back(std::log(u(rng)) / image.pixels[p], p);
            std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(take), keyed.end(),
                              [](const auto& a, const auto& b) { return a.first > b.first; });
            for (std::size_t i = 0; i < take; ++i) ink[i] = keyed[i].second;
        }
        ink.resize(take);
        std::sort(ink.begin(), ink.end());
    }

    Eigen::MatrixXd points(2, static_cast<Eigen::Index>(take));
    const auto cols = static_cast<std::size_t>(image.cols);
    for (std::size_t i = 0; i < take; ++i) {
        const auto row = static_cast<double>(ink[i] / cols);
        const auto col = static_cast<double>(ink[i] % cols);
        points(0, static_cast<Eigen::Index>(i)) = (col + 0.5) / image.cols;
        points(1, static_cast<Eigen::Index>(i)) = (row + 0.5) / image.rows;
    }
    return PointCloud::euclidean(std::move(points));
}

}  // namespace sspd::eval
