#pragma once

#include "sspd/measures.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace sspd::eval {

/// Grayscale image with intensities in [0, 1], row-major.
struct GrayImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> pixels;

    [[nodiscard]] double at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col)];
    }
};

struct LabeledImage {
    GrayImage image;
    int label = 0;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Parses big-endian IDX image and label files. Throws FormatError on bad
/// magic numbers, truncation, trailing bytes or count mismatch.
std::vector<LabeledImage> parse_mnist_idx(std::string_view image_bytes, std::string_view label_bytes);
std::vector<LabeledImage> load_mnist_idx(const std::filesystem::path& images_path,
                                         const std::filesystem::path& labels_path);

/// The first `per_class` images of each label, in file order.
std::vector<LabeledImage> take_per_class(const std::vector<LabeledImage>& images, int per_class);

/// How ink pixels are drawn: uniformly, or with probability proportional to
/// intensity (successive draws without replacement).
enum class SamplingLaw { Uniform, Intensity };

/// Sample (without replacement) of at most `m` pixels brighter than
/// `threshold`, as points ((col + 0.5) / cols, (row + 0.5) / rows) with
/// uniform weights. Throws EmptyImageError when no pixel qualifies.
PointCloud sample_cloud(const GrayImage& image, int m, double threshold, std::uint64_t seed,
                        SamplingLaw law = SamplingLaw::Uniform);

}  // namespace sspd::eval
