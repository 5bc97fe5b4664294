#pragma once

#include "sspd/base_kernel.hpp"
#include "sspd/measures.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace sspd {

/// Symmetric Gram matrix of a point set. Construction enforces symmetry
/// (1e-12 absolute) and finiteness.
class GramMatrix {
public:
    explicit GramMatrix(Eigen::MatrixXd entries);

    [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept { return entries_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return entries_.rows(); }

private:
    Eigen::MatrixXd entries_;
};

/// Weight-centered Gram matrix of a measure.
///
/// With D = diag(w) and P = I - 1 w^T,
///   raw         = P K P^T D              (not symmetric in general)
///   symmetrized = D^{1/2} P K P^T D^{1/2}
/// The two are similar whenever all weights are positive, so they share a
/// spectrum; atoms of weight zero give zero rows and columns in the
/// symmetrized form.
class CenteredGram {
public:
    CenteredGram(Eigen::MatrixXd raw, Eigen::MatrixXd symmetrized, Eigen::VectorXd weights);

    [[nodiscard]] const Eigen::MatrixXd& raw() const noexcept { return raw_; }
    [[nodiscard]] const Eigen::MatrixXd& symmetrized() const noexcept { return symmetrized_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }
    [[nodiscard]] Eigen::MatrixXd delta() const { return weights_.asDiagonal(); }
    [[nodiscard]] Eigen::Index size() const noexcept { return weights_.size(); }

    /// trace(raw) == trace(symmetrized) == sum_i w_i (P K P^T)_ii
    [[nodiscard]] double trace() const { return symmetrized_.trace(); }

private:
    Eigen::MatrixXd raw_;
    Eigen::MatrixXd symmetrized_;
    Eigen::VectorXd weights_;
};

using ItemKernel = std::function<double(ItemHandle, ItemHandle)>;

/// Gram matrix over the concatenated support [a; b], block layout
/// [[K_a, K_ab], [K_ab^T, K_b]].
GramMatrix joint_gram(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& kernel);
GramMatrix joint_gram(const PointCloud& a, const PointCloud& b, const ItemKernel& kernel);

/// Gram matrix of a single cloud.
Eigen::MatrixXd cloud_gram(const PointCloud& cloud, const BaseKernelSpec& kernel);
/// Cross block [k(a_i, b_j)].
Eigen::MatrixXd cross_gram(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& kernel);

CenteredGram center(const GramMatrix& gram, const Eigen::VectorXd& weights);

/// Symmetric-checked (1e-9) entry point for externally computed kernel tables.
CenteredGram from_precomputed(const Eigen::MatrixXd& gram, const Eigen::VectorXd& weights);

/// Eigenvalues of the symmetrized matrix, descending. Values in
/// [-1e-9 |S|, 0) are clamped to zero; anything lower raises NotPSDError.
std::vector<double> spectrum(const CenteredGram& centered);
std::vector<double> clamped_spectrum(const Eigen::MatrixXd& symmetric, double relative_tolerance);

/// d_k = tr((delta S)^k) / 2 for k = 1..count.
std::vector<double> trace_powers(const CenteredGram& centered, double delta, int count);

/// Hutchinson estimate of the same quantities from `probes` Rademacher
/// vectors; O(count * size^2 * probes).
std::vector<double> trace_powers_stochastic(const CenteredGram& centered, double delta, int count,
                                            int probes, std::uint64_t seed);

/// Lazily yields tr(A), tr(A^2), ... for a symmetric matrix A.
///
/// Powers A^1..A^p are formed once (baby steps); beyond that every p further
/// traces cost one product with A^p (giant steps), since
/// tr(A^(a+b)) = <A^a, A^b> for symmetric A. Producing N traces therefore
/// takes about p + N/p matrix products instead of N.
class TracePowerSequence {
public:
    explicit TracePowerSequence(Eigen::MatrixXd a, int baby_steps = 5);

    /// Trace of the next power; the first call returns tr(A).
    double next();
    [[nodiscard]] int count() const noexcept { return k_; }
    [[nodiscard]] int products() const noexcept { return products_; }

private:
    const Eigen::MatrixXd& baby(int j);

    int p_;
    int k_ = 0;
    int products_ = 0;
    std::vector<Eigen::MatrixXd> baby_;  // baby_[j - 1] = A^j
    Eigen::MatrixXd giant_;              // A^(giant_exp_)
    int giant_exp_ = 0;
};

/// Largest eigenvalue of a PSD matrix by power iteration.
struct SpectralRadiusEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};
SpectralRadiusEstimate spectral_radius(const Eigen::MatrixXd& symmetric, int max_iterations = 200,
                                       double relative_tolerance = 1e-6);

/// Right-hand side of delta < 1 / ([max(d w - 1, 1)]^2 d w), which keeps
/// delta * rho below one for every mixture of at most d atoms with weights
/// at most w under a kernel bounded by one.
double delta_bound(int d, double omega);

/// Dense row-major CSV matrix and single-column (or single-row) weights.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
Eigen::VectorXd read_weights_csv(const std::filesystem::path& path);

}  // namespace sspd
