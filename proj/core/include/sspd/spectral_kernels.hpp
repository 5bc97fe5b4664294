#pragma once

#include "sspd/base_kernel.hpp"
#include "sspd/gram.hpp"
#include "sspd/measures.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>

namespace sspd {

/// exp(-tr(K~) / t)
struct TraceKernelParams {
    double t = 0.1;
};

enum class DeterminantMethod { Eigen, Cholesky };

/// det(K~ / eta + I)^{-1/2}
struct IgvKernelParams {
    double eta = 0.01;
    DeterminantMethod method = DeterminantMethod::Eigen;
};

enum class TraceEstimator { Exact, Hutchinson };

/// sum_k (-1)^k c_k with d_k = tr((delta K~)^k) / 2.
struct SeriesKernelParams {
    double delta = 1.0;
    int max_terms = 64;
    double term_tolerance = 1e-10;
    int consecutive = 3;
    TraceEstimator estimator = TraceEstimator::Exact;
    int probes = 64;
    std::uint64_t probe_seed = 1;
};

enum class KernelKind : std::uint32_t { Trace = 1, Igv = 2, Series = 3 };

struct KernelConfig {
    using Params = std::variant<TraceKernelParams, IgvKernelParams, SeriesKernelParams>;

    Params params;
    BaseKernelSpec base = BaseKernelSpec::gaussian(0.1);
    bool normalize = false;

    static KernelConfig trace(double t, BaseKernelSpec base);
    static KernelConfig igv(double eta, BaseKernelSpec base);
    static KernelConfig series(double delta, BaseKernelSpec base);

    [[nodiscard]] KernelKind kind() const noexcept { return static_cast<KernelKind>(params.index() + 1); }
    /// "tr", "igv" or "series".
    [[nodiscard]] std::string name() const;
    /// Column label such as "psi_M delta=1".
    [[nodiscard]] std::string label() const;

    /// Throws InvalidArgument on out-of-range parameters.
    void validate() const;
};

nlohmann::json to_json(const KernelConfig& config);
KernelConfig kernel_config_from_json(const nlohmann::json& doc);

/// Outcome of one series evaluation.
struct SeriesEvaluation {
    double value = 1.0;
    int terms = 0;
    /// Upper bound on delta * rho actually used to admit delta: either the
    /// Frobenius norm of delta K~ or delta times the power-iteration estimate.
    double certified_delta_rho = 0.0;
    bool used_power_iteration = false;
};

double trace_kernel(const CenteredGram& centered, const TraceKernelParams& params);
double igv_kernel(const CenteredGram& centered, const IgvKernelParams& params);
SeriesEvaluation series_kernel(const CenteredGram& centered, const SeriesKernelParams& params);

/// Centered Gram matrix of the mixture (a + b) / 2.
CenteredGram mixture_gram(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& base);

double k_tr(const PointCloud& a, const PointCloud& b, const KernelConfig& config);
double k_0(const PointCloud& a, const PointCloud& b, const KernelConfig& config);
double k_M(const PointCloud& a, const PointCloud& b, const KernelConfig& config);
SeriesEvaluation k_M_detailed(const PointCloud& a, const PointCloud& b, const KernelConfig& config);

/// Dispatches on config.kind(). Never normalizes.
double evaluate(const PointCloud& a, const PointCloud& b, const KernelConfig& config);
/// Same, on a mixture's centered Gram matrix.
double evaluate(const CenteredGram& centered, const KernelConfig& config);

struct KernelMatrixOptions {
    /// Worker threads; 0 means std::thread::hardware_concurrency().
    unsigned jobs = 0;
    /// Used for opaque clouds instead of the config's base kernel.
    ItemKernel item_kernel;
};

struct KernelMatrixStats {
    /// Number of series terms -> number of pairs.
    std::map<int, std::size_t> series_terms;
    std::size_t power_iterations = 0;
    std::size_t pairs = 0;
};

/// m x m matrix of pairwise kernel values over normalized, mutually
/// compatible clouds. With config.normalize the entries are divided by
/// sqrt(k_ii k_jj). The result does not depend on `jobs`.
Eigen::MatrixXd kernel_matrix(std::span<const PointCloud> clouds, const KernelConfig& config,
                              const KernelMatrixOptions& options = {}, KernelMatrixStats* stats = nullptr);

/// 0.99 * delta_bound(2 * max size, max weight / 2) over the dataset.
double choose_delta(std::span<const PointCloud> clouds, const BaseKernelSpec& base);

}  // namespace sspd
