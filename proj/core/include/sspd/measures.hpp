#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace sspd {

/// Handle for a point that lives in an arbitrary space and is only
/// accessible through a kernel.
struct ItemHandle {
    std::uint64_t id = 0;
    friend auto operator<=>(const ItemHandle&, const ItemHandle&) = default;
};

enum class PointMode { Euclidean, Opaque };

/// How weights are treated when a cloud is built.
enum class Ingest {
    Normalize,  ///< rescale to total mass 1 (default)
    Strict,     ///< keep weights as given, reject total mass above 1
};

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kNormalizedTolerance = 1e-9;

/// A weighted finite point cloud, i.e. an atomic sub-probability measure.
///
/// Euclidean points are stored column-wise: `points().col(i)` is the i-th
/// atom. Opaque clouds carry item handles instead and have `dim() == 0`.
/// Instances are immutable once built.
class PointCloud {
public:
    static PointCloud euclidean(Eigen::MatrixXd points, Eigen::VectorXd weights,
                                Ingest ingest = Ingest::Normalize);
    static PointCloud euclidean(Eigen::MatrixXd points, Ingest ingest = Ingest::Normalize);
    static PointCloud opaque(std::vector<ItemHandle> items, Eigen::VectorXd weights,
                             Ingest ingest = Ingest::Normalize);

    [[nodiscard]] PointMode mode() const noexcept { return mode_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return points_.rows(); }
    [[nodiscard]] Eigen::Index size() const noexcept { return weights_.size(); }

    [[nodiscard]] const Eigen::MatrixXd& points() const noexcept { return points_; }
    [[nodiscard]] std::span<const ItemHandle> items() const noexcept { return items_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }

    [[nodiscard]] double mass() const noexcept { return weights_.sum(); }
    [[nodiscard]] double max_weight() const noexcept { return weights_.maxCoeff(); }

    /// Weighted first moment sum_i a_i x_i (Euclidean mode only).
    [[nodiscard]] Eigen::VectorXd mean() const;

    [[nodiscard]] bool compatible_with(const PointCloud& other) const noexcept;

private:
    PointCloud(PointMode mode, Eigen::MatrixXd points, std::vector<ItemHandle> items,
               Eigen::VectorXd weights);

    PointMode mode_;
    Eigen::MatrixXd points_;
    std::vector<ItemHandle> items_;
    Eigen::VectorXd weights_;
};

/// Same atoms, weights rescaled to sum to one. Throws ZeroMassError.
PointCloud normalize_weights(const PointCloud& cloud);

/// The normalized mixture (cloud_a + cloud_b) / 2: atoms of `a` followed by
/// atoms of `b`, every weight halved.
PointCloud mixture(const PointCloud& a, const PointCloud& b);

/// Copy of `cloud` with `count` extra atoms of weight zero appended. The new
/// atoms repeat the first atom (Euclidean) or get fresh handles (opaque).
PointCloud pad_with_null_atoms(const PointCloud& cloud, Eigen::Index count);

}  // namespace sspd
