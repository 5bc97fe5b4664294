#include "sspd/measures.hpp"

#include "sspd/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace sspd {
namespace {

void check_weights(const Eigen::VectorXd& weights, Eigen::Index count) {
    if (count < 1) throw InvalidArgument("point cloud must contain at least one point");
    if (weights.size() != count)
        throw InvalidArgument(
            fmt::format("point cloud has {} points but {} weights", count, weights.size()));
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights(i)) || weights(i) < 0.0)
            throw InvalidArgument(fmt::format("weight {} is negative or not finite", i));
    }
}

Eigen::VectorXd ingest_weights(Eigen::VectorXd weights, Ingest ingest) {
    const double total = weights.sum();
    if (ingest == Ingest::Strict) {
        if (total > 1.0 + kMassTolerance)
            throw MassError(fmt::format("total mass {:.17g} exceeds 1", total));
        return weights;
    }
    if (total <= 0.0) throw ZeroMassError("all weights are zero");
    return weights / total;
}

}  // namespace

PointCloud::PointCloud(PointMode mode, Eigen::MatrixXd points, std::vector<ItemHandle> items,
                       Eigen::VectorXd weights)
    : mode_(mode), points_(std::move(points)), items_(std::move(items)), weights_(std::move(weights)) {}

PointCloud PointCloud::euclidean(Eigen::MatrixXd points, Eigen::VectorXd weights, Ingest ingest) {
    check_weights(weights, points.cols());
    if (points.rows() < 1) throw InvalidArgument("Euclidean points need at least one coordinate");
    if (!points.allFinite()) throw InvalidArgument("point coordinates must be finite");
    return PointCloud(PointMode::Euclidean, std::move(points), {},
                      ingest_weights(std::move(weights), ingest));
}

PointCloud PointCloud::euclidean(Eigen::MatrixXd points, Ingest ingest) {
    const Eigen::Index count = points.cols();
    if (count < 1) throw InvalidArgument("point cloud must contain at least one point");
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
    return euclidean(std::move(points), std::move(weights), ingest);
}

PointCloud PointCloud::opaque(std::vector<ItemHandle> items, Eigen::VectorXd weights, Ingest ingest) {
    check_weights(weights, static_cast<Eigen::Index>(items.size()));
    return PointCloud(PointMode::Opaque, Eigen::MatrixXd(0, static_cast<Eigen::Index>(items.size())),
                      std::move(items), ingest_weights(std::move(weights), ingest));
}

Eigen::VectorXd PointCloud::mean() const {
    if (mode_ != PointMode::Euclidean) throw ModeError("mean is only defined for Euclidean clouds");
    return points_ * weights_;
}

bool PointCloud::compatible_with(const PointCloud& other) const noexcept {
    if (mode_ != other.mode_) return false;
    return mode_ == PointMode::Opaque || dim() == other.dim();
}

PointCloud normalize_weights(const PointCloud& cloud) {
    const double total = cloud.mass();
    if (total <= 0.0) throw ZeroMassError("cannot normalize a cloud whose weights are all zero");
    if (cloud.mode() == PointMode::Euclidean)
        return PointCloud::euclidean(cloud.points(), cloud.weights() / total, Ingest::Strict);
    return PointCloud::opaque({cloud.items().begin(), cloud.items().end()}, cloud.weights() / total,
                              Ingest::Strict);
}

PointCloud mixture(const PointCloud& a, const PointCloud& b) {
    if (!a.compatible_with(b))
        throw ModeMismatchError(fmt::format("cannot mix clouds of dimension {} and {}", a.dim(), b.dim()));
    for (const PointCloud* c : {&a, &b}) {
        if (std::abs(c->mass() - 1.0) > kNormalizedTolerance)
            throw NotNormalizedError(fmt::format("cloud mass {:.17g} is not 1", c->mass()));
    }

    const Eigen::Index n = a.size() + b.size();
    Eigen::VectorXd weights(n);
    weights << 0.5 * a.weights(), 0.5 * b.weights();

    if (a.mode() == PointMode::Euclidean) {
        Eigen::MatrixXd points(a.dim(), n);
        points << a.points(), b.points();
        return PointCloud::euclidean(std::move(points), std::move(weights), Ingest::Strict);
    }
    std::vector<ItemHandle> items(a.items().begin(), a.items().end());
    items.insert(items.end(), b.items().begin(), b.items().end());
    return PointCloud::opaque(std::move(items), std::move(weights), Ingest::Strict);
}

PointCloud pad_with_null_atoms(const PointCloud& cloud, Eigen::Index count) {
    const Eigen::Index n = cloud.size() + count;
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(n);
    weights.head(cloud.size()) = cloud.weights();

    if (cloud.mode() == PointMode::Euclidean) {
        Eigen::MatrixXd points(cloud.dim(), n);
        points.leftCols(cloud.size()) = cloud.points();
        for (Eigen::Index i = cloud.size(); i < n; ++i) points.col(i) = cloud.points().col(0);
        return PointCloud::euclidean(std::move(points), std::move(weights), Ingest::Strict);
    }
    std::vector<ItemHandle> items(cloud.items().begin(), cloud.items().end());
    std::uint64_t next = 0;
    for (const auto& item : items) next = std::max(next, item.id + 1);
    for (Eigen::Index i = 0; i < count; ++i) items.push_back(ItemHandle{next++});
    return PointCloud::opaque(std::move(items), std::move(weights), Ingest::Strict);
}

}  // namespace sspd
