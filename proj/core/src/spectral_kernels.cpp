#include "sspd/spectral_kernels.hpp"

#include "sspd/error.hpp"
#include "sspd/series.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

namespace sspd {
namespace {

constexpr double kSafetyMargin = 1.01;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Supplies successive tr(A^k) for the series.
class TraceSource {
public:
    TraceSource(const Eigen::MatrixXd& a, const SeriesKernelParams& params) {
        if (params.estimator == TraceEstimator::Exact) {
            exact_.emplace(a);
            return;
        }
        a_ = a;
        std::mt19937_64 rng(params.probe_seed);
        std::bernoulli_distribution coin(0.5);
        probes_.resize(a.rows(), params.probes);
        for (Eigen::Index j = 0; j < probes_.cols(); ++j)
            for (Eigen::Index i = 0; i < probes_.rows(); ++i) probes_(i, j) = coin(rng) ? 1.0 : -1.0;
        current_ = probes_;
    }

    double next() {
        if (exact_) return exact_->next();
        Eigen::MatrixXd advanced;
        advanced.noalias() = a_ * current_;
        current_.swap(advanced);
        return probes_.cwiseProduct(current_).sum() / static_cast<double>(probes_.cols());
    }

private:
    std::optional<TracePowerSequence> exact_;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd probes_;
    Eigen::MatrixXd current_;
};

const BaseKernelSpec& require_base(const KernelConfig& config) { return config.base; }

template <class Params>
const Params& params_as(const KernelConfig& config, const char* op) {
    const auto* p = std::get_if<Params>(&config.params);
    if (!p) throw InvalidArgument(fmt::format("{} called with a '{}' kernel configuration", op, config.name()));
    return *p;
}

Eigen::VectorXd mixture_weights(const PointCloud& a, const PointCloud& b) {
    Eigen::VectorXd w(a.size() + b.size());
    w << 0.5 * a.weights(), 0.5 * b.weights();
    return w;
}

void check_pair(const PointCloud& a, const PointCloud& b) {
    if (!a.compatible_with(b))
        throw ModeMismatchError(fmt::format("cannot mix clouds of dimension {} and {}", a.dim(), b.dim()));
    for (const PointCloud* c : {&a, &b}) {
        if (std::abs(c->mass() - 1.0) > kNormalizedTolerance)
            throw NotNormalizedError(fmt::format("cloud mass {:.17g} is not 1", c->mass()));
    }
}

Eigen::MatrixXd item_gram(const PointCloud& a, const PointCloud& b, const ItemKernel& kernel) {
    Eigen::MatrixXd out(a.size(), b.size());
    for (Eigen::Index j = 0; j < b.size(); ++j)
        for (Eigen::Index i = 0; i < a.size(); ++i)
            out(i, j) = kernel(a.items()[static_cast<std::size_t>(i)], b.items()[static_cast<std::size_t>(j)]);
    return out;
}

}  // namespace

KernelConfig KernelConfig::trace(double t, BaseKernelSpec base) {
    KernelConfig c{TraceKernelParams{t}, std::move(base), false};
    c.validate();
    return c;
}

KernelConfig KernelConfig::igv(double eta, BaseKernelSpec base) {
    KernelConfig c{IgvKernelParams{eta}, std::move(base), false};
    c.validate();
    return c;
}

KernelConfig KernelConfig::series(double delta, BaseKernelSpec base) {
    SeriesKernelParams p;
    p.delta = delta;
    KernelConfig c{p, std::move(base), false};
    c.validate();
    return c;
}

std::string KernelConfig::name() const {
    switch (kind()) {
        case KernelKind::Trace: return "tr";
        case KernelKind::Igv: return "igv";
        default: return "series";
    }
}

std::string KernelConfig::label() const {
    return std::visit(overloaded{
                          [](const TraceKernelParams& p) { return fmt::format("psi_tr t={}", p.t); },
                          [](const IgvKernelParams& p) { return fmt::format("psi_0 eta={}", p.eta); },
                          [](const SeriesKernelParams& p) { return fmt::format("psi_M delta={}", p.delta); },
                      },
                      params);
}

void KernelConfig::validate() const {
    std::visit(overloaded{
                   [](const TraceKernelParams& p) {
                       if (!(p.t > 0.0)) throw InvalidArgument(fmt::format("t must be positive, got {}", p.t));
                   },
                   [](const IgvKernelParams& p) {
                       if (!(p.eta > 0.0)) throw InvalidArgument(fmt::format("eta must be positive, got {}", p.eta));
                   },
                   [](const SeriesKernelParams& p) {
                       if (!(p.delta > 0.0) || !std::isfinite(p.delta))
                           throw InvalidArgument(fmt::format("delta must be positive, got {}", p.delta));
                       if (p.max_terms < 1) throw InvalidArgument("max_terms must be >= 1");
                       if (!(p.term_tolerance > 0.0)) throw InvalidArgument("term tolerance must be positive");
                       if (p.consecutive < 1) throw InvalidArgument("consecutive must be >= 1");
                       if (p.probes < 1) throw InvalidArgument("probes must be >= 1");
                   },
               },
               params);
}

nlohmann::json to_json(const KernelConfig& config) {
    nlohmann::json doc;
    doc["kind"] = config.name();
    doc["base"] = config.base.to_string();
    doc["normalize"] = config.normalize;
    std::visit(overloaded{
                   [&](const TraceKernelParams& p) { doc["t"] = p.t; },
                   [&](const IgvKernelParams& p) {
                       doc["eta"] = p.eta;
                       doc["determinant"] = p.method == DeterminantMethod::Eigen ? "eigen" : "cholesky";
                   },
                   [&](const SeriesKernelParams& p) {
                       doc["delta"] = p.delta;
                       doc["max_terms"] = p.max_terms;
                       doc["term_tolerance"] = p.term_tolerance;
                       doc["consecutive"] = p.consecutive;
                       doc["estimator"] = p.estimator == TraceEstimator::Exact ? "exact" : "hutchinson";
                       if (p.estimator == TraceEstimator::Hutchinson) {
                           doc["probes"] = p.probes;
                           doc["probe_seed"] = p.probe_seed;
                       }
                   },
               },
               config.params);
    return doc;
}

KernelConfig kernel_config_from_json(const nlohmann::json& doc) {
    try {
        const auto kind = doc.at("kind").get<std::string>();
        KernelConfig config;
        config.base = BaseKernelSpec::parse(doc.at("base").get<std::string>());
        config.normalize = doc.value("normalize", false);
        if (kind == "tr") {
            config.params = TraceKernelParams{doc.at("t").get<double>()};
        } else if (kind == "igv") {
            IgvKernelParams p{doc.at("eta").get<double>()};
            p.method = doc.value("determinant", std::string("eigen")) == "cholesky" ? DeterminantMethod::Cholesky
                                                                                   : DeterminantMethod::Eigen;
            config.params = p;
        } else if (kind == "series") {
            SeriesKernelParams p;
            p.delta = doc.at("delta").get<double>();
            p.max_terms = doc.value("max_terms", p.max_terms);
            p.term_tolerance = doc.value("term_tolerance", p.term_tolerance);
            p.consecutive = doc.value("consecutive", p.consecutive);
            p.estimator = doc.value("estimator", std::string("exact")) == "hutchinson" ? TraceEstimator::Hutchinson
                                                                                       : TraceEstimator::Exact;
            p.probes = doc.value("probes", p.probes);
            p.probe_seed = doc.value("probe_seed", p.probe_seed);
            config.params = p;
        } else {
            throw FormatError(fmt::format("unknown kernel kind '{}'", kind));
        }
        config.validate();
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("invalid kernel configuration: {}", e.what()));
    }
}

double trace_kernel(const CenteredGram& centered, const TraceKernelParams& params) {
    return std::exp(-centered.raw().trace() / params.t);
}

double igv_kernel(const CenteredGram& centered, const IgvKernelParams& params) {
    double log_det = 0.0;
    if (params.method == DeterminantMethod::Eigen) {
        for (double v : spectrum(centered)) log_det += std::log1p(v / params.eta);
    } else {
        const Eigen::Index n = centered.size();
        Eigen::MatrixXd m = centered.symmetrized() / params.eta;
        m.diagonal().array() += 1.0;
        const Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() != Eigen::Success)
            throw NotPSDError("I + K~/eta is not positive definite; the centered Gram matrix is indefinite");
        const auto& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
    }
    return std::exp(-0.5 * log_det);
}

SeriesEvaluation series_kernel(const CenteredGram& centered, const SeriesKernelParams& params) {
    SeriesEvaluation out;
    const Eigen::MatrixXd a = params.delta * centered.symmetrized();

    // rho(A) <= |A|_F for symmetric A; fall back to power iteration only
    // when that bound cannot admit delta.
    const double frobenius = a.norm();
    out.certified_delta_rho = frobenius;
    if (frobenius * kSafetyMargin >= 1.0) {
        const auto rho = spectral_radius(centered.symmetrized());
        out.used_power_iteration = true;
        out.certified_delta_rho = params.delta * rho.value;
        if (params.delta * rho.value * kSafetyMargin >= 1.0) throw DeltaTooLargeError(params.delta, rho.value);
    }

    TraceSource traces(a, params);
    AlternatingSeries series;
    int small_run = 0;
    while (series.terms() < params.max_terms) {
        const double c_k = series.push(0.5 * traces.next());
        small_run =
            std::abs(c_k) < params.term_tolerance * (1.0 + std::abs(series.partial_sum())) ? small_run + 1 : 0;
        if (small_run >= params.consecutive) {
            out.value = series.partial_sum();
            out.terms = series.terms();
            return out;
        }
    }
    throw NonConvergenceError(fmt::format(
        "series kernel did not converge within {} terms (delta = {}, certified delta*rho <= {:.6g})",
        params.max_terms, params.delta, out.certified_delta_rho));
}

CenteredGram mixture_gram(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& base) {
    check_pair(a, b);
    return center(joint_gram(a, b, base), mixture_weights(a, b));
}

double evaluate(const CenteredGram& centered, const KernelConfig& config) {
    return std::visit(overloaded{
                          [&](const TraceKernelParams& p) { return trace_kernel(centered, p); },
                          [&](const IgvKernelParams& p) { return igv_kernel(centered, p); },
                          [&](const SeriesKernelParams& p) { return series_kernel(centered, p).value; },
                      },
                      config.params);
}

double evaluate(const PointCloud& a, const PointCloud& b, const KernelConfig& config) {
    config.validate();
    return evaluate(mixture_gram(a, b, require_base(config)), config);
}

double k_tr(const PointCloud& a, const PointCloud& b, const KernelConfig& config) {
    return trace_kernel(mixture_gram(a, b, config.base), params_as<TraceKernelParams>(config, "k_tr"));
}

double k_0(const PointCloud& a, const PointCloud& b, const KernelConfig& config) {
    return igv_kernel(mixture_gram(a, b, config.base), params_as<IgvKernelParams>(config, "k_0"));
}

SeriesEvaluation k_M_detailed(const PointCloud& a, const PointCloud& b, const KernelConfig& config) {
    const auto& params = params_as<SeriesKernelParams>(config, "k_M");
    config.validate();
    return series_kernel(mixture_gram(a, b, config.base), params);
}

double k_M(const PointCloud& a, const PointCloud& b, const KernelConfig& config) {
    return k_M_detailed(a, b, config).value;
}

Eigen::MatrixXd kernel_matrix(std::span<const PointCloud> clouds, const KernelConfig& config,
                              const KernelMatrixOptions& options, KernelMatrixStats* stats) {
    config.validate();
    const std::size_t m = clouds.size();
    if (m == 0) return {};
    for (std::size_t i = 0; i < m; ++i) {
        try {
            check_pair(clouds[i], clouds[0]);
        } catch (const Error& e) {
            throw PairError(i, 0, e);
        }
    }
    const bool opaque = clouds[0].mode() == PointMode::Opaque;
    if (opaque && !options.item_kernel) throw ModeError("opaque clouds need an item kernel");

    std::vector<Eigen::MatrixXd> own(m);
    for (std::size_t i = 0; i < m; ++i)
        own[i] = opaque ? item_gram(clouds[i], clouds[i], options.item_kernel) : cloud_gram(clouds[i], config.base);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(m * (m + 1) / 2);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) pairs.emplace_back(i, j);

    Eigen::MatrixXd k(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::vector<int> terms(pairs.size(), 0);
    std::vector<char> powered(pairs.size(), 0);
    std::vector<std::optional<Error>> failures(pairs.size());

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> first_failure{std::numeric_limits<std::size_t>::max()};

    auto work = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= pairs.size() || idx > first_failure.load()) return;
            const auto [i, j] = pairs[idx];
            const PointCloud& a = clouds[i];
            const PointCloud& b = clouds[j];
            try {
                const Eigen::MatrixXd cross =
                    opaque ? item_gram(a, b, options.item_kernel) : cross_gram(a, b, config.base);
                Eigen::MatrixXd joint(a.size() + b.size(), a.size() + b.size());
                joint << own[i], cross, cross.transpose(), own[j];
                const CenteredGram centered = center(GramMatrix(std::move(joint)), mixture_weights(a, b));
                double value = 0.0;
                if (const auto* p = std::get_if<SeriesKernelParams>(&config.params)) {
                    const auto eval = series_kernel(centered, *p);
                    value = eval.value;
                    terms[idx] = eval.terms;
                    powered[idx] = eval.used_power_iteration ? 1 : 0;
                } else {
                    value = evaluate(centered, config);
                }
                k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
                k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
            } catch (const Error& e) {
                failures[idx].emplace(e);
                std::size_t current = first_failure.load();
                while (idx < current && !first_failure.compare_exchange_weak(current, idx)) {
                }
            }
        }
    };

    unsigned jobs = options.jobs != 0 ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, pairs.size()));
    if (jobs <= 1) {
        work();
    } else {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) workers.emplace_back(work);
    }

    if (const std::size_t f = first_failure.load(); f != std::numeric_limits<std::size_t>::max())
        throw PairError(pairs[f].first, pairs[f].second, *failures[f]);

    if (stats) {
        stats->pairs += pairs.size();
        for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
            if (terms[idx] > 0) ++stats->series_terms[terms[idx]];
            stats->power_iterations += static_cast<std::size_t>(powered[idx]);
        }
    }

    if (config.normalize) {
        const Eigen::VectorXd scale = k.diagonal().cwiseSqrt().cwiseInverse();
        k = (scale.asDiagonal() * k * scale.asDiagonal()).eval();
        k.diagonal().setOnes();
    }
    return k;
}

double choose_delta(std::span<const PointCloud> clouds, const BaseKernelSpec& base) {
    if (!is_bounded_by_one(base))
        throw UnboundedKernelError(
            fmt::format("base kernel '{}' is not bounded by one; pick delta explicitly", base.to_string()));
    if (clouds.empty()) throw InvalidArgument("cannot choose delta for an empty dataset");
    Eigen::Index max_size = 0;
    double max_weight = 0.0;
    for (const auto& cloud : clouds) {
        max_size = std::max(max_size, cloud.size());
        max_weight = std::max(max_weight, cloud.max_weight());
    }
    return 0.99 * delta_bound(static_cast<int>(2 * max_size), 0.5 * max_weight);
}

}  // namespace sspd
