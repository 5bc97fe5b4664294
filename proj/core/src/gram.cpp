#include "sspd/gram.hpp"

#include "sspd/cloud_io.hpp"
#include "sspd/error.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <variant>

namespace sspd {
namespace {

double frobenius_inner(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.cwiseProduct(y).sum();
}

void require_euclidean(const PointCloud& cloud) {
    if (cloud.mode() != PointMode::Euclidean)
        throw ModeError("base kernels are evaluated on Euclidean points; use an item kernel for opaque clouds");
}

template <class Fn>
Eigen::MatrixXd symmetric_fill(Eigen::Index n, Fn&& entry) {
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            out(i, j) = entry(i, j);
            out(j, i) = out(i, j);
        }
    }
    return out;
}

std::vector<std::vector<double>> parse_csv_numbers(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        ++line_no;
        start = end + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        for (;;) {
            const std::size_t comma = line.find(',', pos);
            std::string_view field = line.substr(pos, comma - pos);
            while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
            while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc() || ptr != field.data() + field.size())
                throw FormatError(fmt::format("{}:{}: cannot parse '{}'", path.string(), line_no, field));
            row.push_back(value);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

GramMatrix::GramMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
        throw AsymmetryError(fmt::format("Gram matrix is {}x{}", entries_.rows(), entries_.cols()));
    if (!entries_.allFinite()) throw InvalidArgument("Gram matrix has non-finite entries");
    const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw AsymmetryError(fmt::format("Gram matrix asymmetry {:.3g} exceeds 1e-12", asym));
}

CenteredGram::CenteredGram(Eigen::MatrixXd raw, Eigen::MatrixXd symmetrized, Eigen::VectorXd weights)
    : raw_(std::move(raw)), symmetrized_(std::move(symmetrized)), weights_(std::move(weights)) {}

Eigen::MatrixXd cloud_gram(const PointCloud& cloud, const BaseKernelSpec& kernel) {
    require_euclidean(cloud);
    const auto& x = cloud.points();
    if (const auto* g = std::get_if<GaussianKernel>(&kernel.kind())) {
        const double scale = -1.0 / (2.0 * g->sigma * g->sigma);
        return symmetric_fill(x.cols(), [&](Eigen::Index i, Eigen::Index j) {
            return i == j ? 1.0 : std::exp(scale * (x.col(i) - x.col(j)).squaredNorm());
        });
    }
    return symmetric_fill(x.cols(), [&](Eigen::Index i, Eigen::Index j) { return kernel(x.col(i), x.col(j)); });
}

Eigen::MatrixXd cross_gram(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& kernel) {
    require_euclidean(a);
    require_euclidean(b);
    if (a.dim() != b.dim())
        throw ModeMismatchError(fmt::format("clouds have dimensions {} and {}", a.dim(), b.dim()));
    const auto& x = a.points();
    const auto& y = b.points();
    Eigen::MatrixXd out(x.cols(), y.cols());
    if (const auto* g = std::get_if<GaussianKernel>(&kernel.kind())) {
        const double scale = -1.0 / (2.0 * g->sigma * g->sigma);
        for (Eigen::Index j = 0; j < y.cols(); ++j)
            for (Eigen::Index i = 0; i < x.cols(); ++i)
                out(i, j) = std::exp(scale * (x.col(i) - y.col(j)).squaredNorm());
        return out;
    }
    for (Eigen::Index j = 0; j < y.cols(); ++j)
        for (Eigen::Index i = 0; i < x.cols(); ++i) out(i, j) = kernel(x.col(i), y.col(j));
    return out;
}

GramMatrix joint_gram(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& kernel) {
    const Eigen::MatrixXd cross = cross_gram(a, b, kernel);
    Eigen::MatrixXd k(a.size() + b.size(), a.size() + b.size());
    k << cloud_gram(a, kernel), cross, cross.transpose(), cloud_gram(b, kernel);
    return GramMatrix(std::move(k));
}

GramMatrix joint_gram(const PointCloud& a, const PointCloud& b, const ItemKernel& kernel) {
    if (a.mode() != PointMode::Opaque || b.mode() != PointMode::Opaque)
        throw ModeError("item kernels apply to opaque clouds only");
    std::vector<ItemHandle> items(a.items().begin(), a.items().end());
    items.insert(items.end(), b.items().begin(), b.items().end());
    const auto n = static_cast<Eigen::Index>(items.size());
    return GramMatrix(symmetric_fill(n, [&](Eigen::Index i, Eigen::Index j) {
        return kernel(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)]);
    }));
}

CenteredGram center(const GramMatrix& gram, const Eigen::VectorXd& weights) {
    const Eigen::Index n = gram.size();
    if (weights.size() != n)
        throw WeightMismatchError(fmt::format("{} weights for a {}x{} Gram matrix", weights.size(), n, n));
    if ((weights.array() < 0.0).any() || !weights.allFinite())
        throw WeightMismatchError("weights must be finite and nonnegative");
    if (std::abs(weights.sum() - 1.0) > kNormalizedTolerance)
        throw WeightMismatchError(fmt::format("weights sum to {:.17g}, expected 1", weights.sum()));

    const Eigen::MatrixXd& k = gram.entries();
    const Eigen::VectorXd u = k * weights;
    const double c = weights.dot(u);

    // P K P^T with P = I - 1 w^T, entrywise: K_ij - (u_i + u_j) + c.
    Eigen::MatrixXd centered(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) centered(i, j) = k(i, j) - (u(i) + u(j)) + c;

    const Eigen::VectorXd root = weights.cwiseSqrt();
    Eigen::MatrixXd raw = centered * weights.asDiagonal();
    Eigen::MatrixXd sym(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) sym(i, j) = (root(i) * root(j)) * centered(i, j);

    return CenteredGram(std::move(raw), std::move(sym), weights);
}

CenteredGram from_precomputed(const Eigen::MatrixXd& gram, const Eigen::VectorXd& weights) {
    if (gram.rows() != gram.cols())
        throw AsymmetryError(fmt::format("kernel table is {}x{}", gram.rows(), gram.cols()));
    if (!gram.allFinite()) throw InvalidArgument("kernel table has non-finite entries");
    const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9) throw AsymmetryError(fmt::format("kernel table asymmetry {:.3g} exceeds 1e-9", asym));
    Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
    return center(GramMatrix(std::move(sym)), weights);
}

std::vector<double> clamped_spectrum(const Eigen::MatrixXd& symmetric, double relative_tolerance) {
    if (symmetric.size() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NotPSDError("symmetric eigensolver failed to converge");
    const Eigen::VectorXd& values = solver.eigenvalues();
    const double scale = values.cwiseAbs().maxCoeff();
    const double floor = relative_tolerance * scale;

    std::vector<double> out(values.data(), values.data() + values.size());
    std::sort(out.begin(), out.end(), std::greater<>());
    for (double& v : out) {
        if (v < -floor)
            throw NotPSDError(fmt::format("eigenvalue {:.6g} below -{:.3g}; matrix is not positive semidefinite",
                                          v, floor));
        if (v < 0.0) v = 0.0;
    }
    return out;
}

std::vector<double> spectrum(const CenteredGram& centered) {
    return clamped_spectrum(centered.symmetrized(), 1e-9);
}

TracePowerSequence::TracePowerSequence(Eigen::MatrixXd a, int baby_steps) : p_(std::max(baby_steps, 2)) {
    baby_.push_back(std::move(a));
}

const Eigen::MatrixXd& TracePowerSequence::baby(int j) {
    while (static_cast<int>(baby_.size()) < j) {
        Eigen::MatrixXd next;
        next.noalias() = baby_.back() * baby_.front();
        ++products_;
        baby_.push_back(std::move(next));
    }
    return baby_[static_cast<std::size_t>(j - 1)];
}

double TracePowerSequence::next() {
    const int k = ++k_;
    if (k == 1) return baby_.front().trace();
    if (k <= 2 * p_) {
        const int hi = (k + 1) / 2;
        const int lo = k / 2;
        const Eigen::MatrixXd& upper = baby(hi);
        return frobenius_inner(upper, baby(lo));
    }
    // k = g + a with g a multiple of p, g >= 2p, 1 <= a <= p.
    const int g = p_ * ((k - 1) / p_);
    if (giant_exp_ < g) {
        const Eigen::MatrixXd& step = baby(p_);
        Eigen::MatrixXd next;
        if (giant_exp_ == 0) {
            next.noalias() = step * step;
            giant_exp_ = 2 * p_;
        } else {
            next.noalias() = giant_ * step;
            giant_exp_ += p_;
        }
        ++products_;
        giant_ = std::move(next);
    }
    return frobenius_inner(giant_, baby(k - g));
}

std::vector<double> trace_powers(const CenteredGram& centered, double delta, int count) {
    if (!(delta > 0.0)) throw InvalidArgument(fmt::format("delta must be positive, got {}", delta));
    if (count < 1) throw InvalidArgument("need at least one trace power");
    TracePowerSequence sequence(delta * centered.symmetrized());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out.push_back(0.5 * sequence.next());
    return out;
}

std::vector<double> trace_powers_stochastic(const CenteredGram& centered, double delta, int count, int probes,
                                            std::uint64_t seed) {
    if (!(delta > 0.0)) throw InvalidArgument(fmt::format("delta must be positive, got {}", delta));
    if (count < 1 || probes < 1) throw InvalidArgument("need at least one trace power and one probe");
    const Eigen::MatrixXd a = delta * centered.symmetrized();
    const Eigen::Index n = a.rows();
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);

    std::vector<double> sums(static_cast<std::size_t>(count), 0.0);
    Eigen::VectorXd z(n), v(n), w(n);
    for (int probe = 0; probe < probes; ++probe) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = coin(rng) ? 1.0 : -1.0;
        v = z;
        for (int k = 0; k < count; ++k) {
            w.noalias() = a * v;
            v.swap(w);
            sums[static_cast<std::size_t>(k)] += z.dot(v);
        }
    }
    for (double& s : sums) s *= 0.5 / probes;
    return sums;
}

SpectralRadiusEstimate spectral_radius(const Eigen::MatrixXd& symmetric, int max_iterations,
                                       double relative_tolerance) {
    SpectralRadiusEstimate estimate;
    const Eigen::Index n = symmetric.rows();
    if (n == 0) {
        estimate.converged = true;
        return estimate;
    }
    std::mt19937_64 rng(0x5eedf00dULL);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    v.normalize();

    Eigen::VectorXd w(n);
    double previous = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        w.noalias() = symmetric * v;
        const double rayleigh = v.dot(w);
        const double norm = w.norm();
        estimate.iterations = it;
        estimate.value = std::max(rayleigh, 0.0);
        if (norm == 0.0) {
            estimate.converged = true;
            return estimate;
        }
        if (it > 1 && std::abs(rayleigh - previous) <= relative_tolerance * std::abs(rayleigh)) {
            estimate.converged = true;
            return estimate;
        }
        previous = rayleigh;
        v = w / norm;
    }
    return estimate;
}

double delta_bound(int d, double omega) {
    if (d < 1) throw InvalidArgument(fmt::format("support size must be >= 1, got {}", d));
    if (!(omega > 0.0 && omega <= 1.0))
        throw InvalidArgument(fmt::format("maximal weight must lie in (0, 1], got {}", omega));
    const double load = static_cast<double>(d) * omega;
    const double excess = std::max(load - 1.0, 1.0);
    return 1.0 / (excess * excess * load);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    const auto rows = parse_csv_numbers(path);
    if (rows.empty()) throw FormatError(fmt::format("{}: empty matrix", path.string()));
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != m)
            throw FormatError(fmt::format("{}: row {} has {} entries, expected {}", path.string(), i + 1,
                                          row.size(), m));
        for (Eigen::Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
    }
    return out;
}

Eigen::VectorXd read_weights_csv(const std::filesystem::path& path) {
    std::vector<double> flat;
    for (const auto& row : parse_csv_numbers(path)) flat.insert(flat.end(), row.begin(), row.end());
    if (flat.empty()) throw FormatError(fmt::format("{}: no weights", path.string()));
    return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

}  // namespace sspd
