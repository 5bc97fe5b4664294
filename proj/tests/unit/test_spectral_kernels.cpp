#include "oracles.hpp"

#include "sspd/error.hpp"
#include "sspd/euclid_variance.hpp"
#include "sspd/spectral_kernels.hpp"

#include <fmt/format.h>
#include <gtest/gtest.h>

using namespace sspd;

namespace {

const auto kGauss = BaseKernelSpec::gaussian(0.1);

PointCloud single(double x, double y) {
    Eigen::MatrixXd p(2, 1);
    p << x, y;
    return PointCloud::euclidean(p);
}

/// A centered Gram matrix whose symmetrized form has the given nonzero
/// spectrum (weights uniform over lambda.size() + 1 atoms).
CenteredGram with_spectrum(std::mt19937_64& rng, const Eigen::VectorXd& lambda) {
    const Eigen::Index n = lambda.size() + 1;
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    Eigen::MatrixXd basis = oracle::random_orthogonal(rng, n);
    basis.col(0) = w.cwiseSqrt();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd s = q.rightCols(n - 1) * lambda.asDiagonal() * q.rightCols(n - 1).transpose();
    const Eigen::MatrixXd dinv = w.cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::MatrixXd k = dinv * s * dinv;
    return from_precomputed(0.5 * (k + k.transpose()), w);
}

Eigen::MatrixXd mixture_sym(const PointCloud& a, const PointCloud& b, const BaseKernelSpec& base) {
    const auto g = oracle::joint_gram(a, b, [&](const auto& x, const auto& y) { return base(x, y); });
    return oracle::centered_sym(g, oracle::mixture_weights(a, b));
}

}  // namespace

TEST(KTrace, IdenticalSingletonsGiveOne) {
    const auto a = single(0.4, 0.4);
    EXPECT_EQ(k_tr(a, a, KernelConfig::trace(0.1, kGauss)), 1.0);
}

TEST(KTrace, ConstantBaseKernelGivesOne) {
    std::mt19937_64 rng(51);
    const auto a = oracle::random_cloud(rng, 5);
    const auto b = oracle::random_cloud(rng, 3);
    const auto c = from_precomputed(Eigen::MatrixXd::Ones(8, 8), oracle::mixture_weights(a, b));
    EXPECT_EQ(trace_kernel(c, {0.1}), 1.0);
    EXPECT_EQ(igv_kernel(c, {0.01}), 1.0);
    EXPECT_EQ(series_kernel(c, {}).value, 1.0);
}

TEST(KTrace, TwoPointHandTrace) {
    const double v = k_tr(single(0, 0), single(0.1, 0), KernelConfig::trace(0.1, kGauss));
    EXPECT_NEAR(v, std::exp(-(1 - std::exp(-0.5)) / (2 * 0.1)), 1e-14);
}

TEST(KTrace, MatchesLiteralTrace) {
    std::mt19937_64 rng(52);
    for (int t = 0; t < 20; ++t) {
        const auto a = oracle::random_cloud(rng, 1 + t % 7);
        const auto b = oracle::random_cloud(rng, 1 + t % 5);
        const double ref = std::exp(-mixture_sym(a, b, kGauss).trace() / 0.3);
        EXPECT_NEAR(k_tr(a, b, KernelConfig::trace(0.3, kGauss)), ref, 1e-13 * ref);
    }
}

TEST(KIgv, Examples) {
    std::mt19937_64 rng(53);
    EXPECT_EQ(igv_kernel(with_spectrum(rng, Eigen::Vector2d(0, 0)), {1.0}), 1.0);
    const auto c = with_spectrum(rng, Eigen::Vector2d(0.5, 0.25));
    EXPECT_NEAR(igv_kernel(c, {1.0}), 0.730297, 1e-6);
    EXPECT_NEAR(igv_kernel(c, {1.0}), 1 / std::sqrt(1.5 * 1.25), 1e-12);
}

TEST(KIgv, MonotoneToOneAsEtaGrows) {
    std::mt19937_64 rng(54);
    const auto a = oracle::random_cloud(rng, 6);
    const auto b = oracle::random_cloud(rng, 6);
    const auto c = mixture_gram(a, b, kGauss);
    double last = 0.0;
    for (double eta = 1e-3; eta < 1e7; eta *= 3) {
        const double v = igv_kernel(c, {eta});
        EXPECT_GT(v, last);
        EXPECT_LE(v, 1.0);
        last = v;
    }
    EXPECT_NEAR(last, 1.0, 1e-6);
}

TEST(KIgv, CholeskyAgreesWithEigenvalues) {
    std::mt19937_64 rng(55);
    for (int t = 0; t < 30; ++t) {
        const auto a = oracle::random_cloud(rng, 2 + t % 20);
        const auto b = oracle::random_cloud(rng, 2 + t % 13);
        const auto c = mixture_gram(a, b, kGauss);
        for (double eta : {0.01, 1.0}) {
            const double e = igv_kernel(c, {eta, DeterminantMethod::Eigen});
            const double l = igv_kernel(c, {eta, DeterminantMethod::Cholesky});
            EXPECT_NEAR(e, l, 1e-12 * e);
            const double ref = oracle::inv_sqrt_det(mixture_sym(a, b, kGauss), eta);
            EXPECT_NEAR(e, ref, 1e-10 * ref);
        }
    }
}

TEST(KSeries, Examples) {
    std::mt19937_64 rng(56);
    EXPECT_EQ(series_kernel(with_spectrum(rng, Eigen::Vector2d(0, 0)), {}).value, 1.0);
    const auto c = with_spectrum(rng, Eigen::Vector2d(0.5, 0.25));
    SeriesKernelParams p;
    p.delta = 1.0;
    EXPECT_NEAR(series_kernel(c, p).value, 0.730297, 1e-6);
    EXPECT_NEAR(series_kernel(c, p).value, igv_kernel(c, {1.0}), 1e-8);
}

TEST(KSeries, DeltaTooLargeReportsRho) {
    std::mt19937_64 rng(57);
    const auto c = with_spectrum(rng, Eigen::Vector3d(0.6, 0.2, 0.1));
    SeriesKernelParams p;
    p.delta = 2.0;
    try {
        series_kernel(c, p);
        FAIL() << "expected DeltaTooLargeError";
    } catch (const DeltaTooLargeError& e) {
        EXPECT_NEAR(e.rho(), 0.6, 1e-5);
        EXPECT_EQ(e.delta(), 2.0);
        EXPECT_NE(std::string(e.what()).find(fmt::format("rho = {:.9g}", e.rho())), std::string::npos) << e.what();
    }
}

TEST(KSeries, NonConvergenceAtCap) {
    std::mt19937_64 rng(58);
    const auto c = with_spectrum(rng, Eigen::Vector2d(0.9, 0.5));
    SeriesKernelParams p;
    p.max_terms = 4;
    EXPECT_THROW(series_kernel(c, p), NonConvergenceError);
}

TEST(KSeries, EquivalentToIgvBelowPointNineFive) {
    std::mt19937_64 rng(59);
    for (int t = 0; t < 40; ++t) {
        const auto a = oracle::random_cloud(rng, 2 + t % 15);
        const auto b = oracle::random_cloud(rng, 2 + t % 11);
        const auto c = mixture_gram(a, b, kGauss);
        const double rho = oracle::sym_eigenvalues(c.symmetrized()).maxCoeff();
        SeriesKernelParams p;
        p.delta = 0.95 / rho;
        p.max_terms = 2000;
        const double ref = oracle::inv_sqrt_det(c.symmetrized(), 1.0 / p.delta);
        EXPECT_NEAR(series_kernel(c, p).value, ref, 1e-8);
    }
}

TEST(KSeries, HutchinsonEstimatorIsCloseAndSeeded) {
    std::mt19937_64 rng(60);
    const auto a = oracle::random_cloud(rng, 20);
    const auto b = oracle::random_cloud(rng, 20);
    const auto c = mixture_gram(a, b, kGauss);
    SeriesKernelParams p;
    p.estimator = TraceEstimator::Hutchinson;
    p.probes = 2000;
    const double est = series_kernel(c, p).value;
    EXPECT_NEAR(est, igv_kernel(c, {1.0}), 0.02);
    EXPECT_EQ(est, series_kernel(c, p).value);
}

TEST(Kernels, SymmetricInArguments) {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 20; ++t) {
        const auto a = oracle::random_cloud(rng, 1 + t % 9);
        const auto b = oracle::random_cloud(rng, 1 + t % 6);
        for (const auto& cfg : {KernelConfig::trace(0.1, kGauss), KernelConfig::igv(0.01, kGauss), KernelConfig::series(1, kGauss)}) {
            const double x = evaluate(a, b, cfg), y = evaluate(b, a, cfg);
            EXPECT_NEAR(x, y, 1e-12) << cfg.label();
            EXPECT_GT(x, 0.0);
            EXPECT_LE(x, 1.0);
        }
    }
}

TEST(Kernels, NullPointInvariance) {
    std::mt19937_64 rng(62);
    for (int t = 0; t < 20; ++t) {
        const auto a = oracle::random_cloud(rng, 2 + t % 6);
        const auto b = oracle::random_cloud(rng, 2 + t % 4);
        const auto pa = pad_with_null_atoms(a, 1 + t % 3);
        for (const auto& cfg : {KernelConfig::trace(0.1, kGauss), KernelConfig::igv(0.01, kGauss), KernelConfig::series(1, kGauss)})
            EXPECT_NEAR(evaluate(a, b, cfg), evaluate(pa, b, cfg), 1e-10) << cfg.label();
    }
}

TEST(Kernels, GramPathMatchesVariancePathForLinearBase) {
    std::mt19937_64 rng(63);
    const auto lin = BaseKernelSpec::linear();
    for (int t = 0; t < 20; ++t) {
        const auto a = oracle::random_cloud(rng, 2 + t % 6, 1 + t % 3);
        const auto b = oracle::random_cloud(rng, 2 + t % 5, 1 + t % 3);
        const auto v = variance(mixture(a, b));
        EXPECT_NEAR(k_0(a, b, KernelConfig::igv(0.05, lin)), psi0(v, 0.05), 1e-8);
        const double delta = 0.5 / std::max(v.eigenvalues().front(), 1e-3);
        const auto scaled = VarianceMatrix::from_matrix(delta * v.sigma());
        EXPECT_NEAR(k_M(a, b, KernelConfig::series(delta, lin)), psi_M_variance(scaled), 1e-8);
        EXPECT_NEAR(k_tr(a, b, KernelConfig::trace(0.2, lin)), std::exp(-psi_tr(v) / 0.2), 1e-12);
    }
}

TEST(Kernels, ConfigValidationAndKinds) {
    EXPECT_THROW(KernelConfig::trace(0.0, kGauss).validate(), InvalidArgument);
    EXPECT_THROW(KernelConfig::igv(-1.0, kGauss).validate(), InvalidArgument);
    EXPECT_THROW(KernelConfig::series(0.0, kGauss).validate(), InvalidArgument);
    auto s = KernelConfig::series(1.0, kGauss);
    std::get<SeriesKernelParams>(s.params).max_terms = 0;
    EXPECT_THROW(s.validate(), InvalidArgument);
    EXPECT_EQ(KernelConfig::trace(1, kGauss).kind(), KernelKind::Trace);
    EXPECT_EQ(KernelConfig::igv(1, kGauss).kind(), KernelKind::Igv);
    EXPECT_EQ(KernelConfig::series(1, kGauss).kind(), KernelKind::Series);
    EXPECT_FALSE(KernelConfig::series(1, kGauss).normalize);
    const std::vector<PointCloud> clouds{single(0, 0)};
    EXPECT_THROW(k_0(clouds[0], clouds[0], KernelConfig::trace(1, kGauss)), InvalidArgument);
}

TEST(Kernels, ConfigJsonRoundTrip) {
    auto c = KernelConfig::series(0.7, BaseKernelSpec::polynomial(2, 1.0));
    c.normalize = true;
    std::get<SeriesKernelParams>(c.params).max_terms = 99;
    const auto back = kernel_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(std::get<SeriesKernelParams>(back.params).max_terms, 99);
    EXPECT_THROW(kernel_config_from_json(nlohmann::json::parse(R"({"kind":"zonal"})")), FormatError);
}

TEST(KernelMatrix, SingleCloud) {
    const std::vector<PointCloud> clouds{single(0.2, 0.3)};
    const auto k = kernel_matrix(clouds, KernelConfig::series(1, kGauss));
    ASSERT_EQ(k.rows(), 1);
    EXPECT_GT(k(0, 0), 0.0);
}

TEST(KernelMatrix, MatchesPairwiseEvaluationAndIsDeterministic) {
    std::mt19937_64 rng(64);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < 9; ++i) clouds.push_back(oracle::random_cloud(rng, 2 + i % 5));
    for (const auto& cfg : {KernelConfig::trace(0.1, kGauss), KernelConfig::igv(0.01, kGauss), KernelConfig::series(1, kGauss)}) {
        KernelMatrixOptions one, many;
        one.jobs = 1;
        many.jobs = 4;
        const auto k1 = kernel_matrix(clouds, cfg, one);
        const auto k4 = kernel_matrix(clouds, cfg, many);
        EXPECT_EQ(k1, k4) << cfg.label();
        EXPECT_EQ(k1, k1.transpose());
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j) EXPECT_NEAR(k1(i, j), evaluate(clouds[std::size_t(i)], clouds[std::size_t(j)], cfg), 1e-12);
    }
}

TEST(KernelMatrix, NormalizedHasUnitDiagonal) {
    std::mt19937_64 rng(65);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < 6; ++i) clouds.push_back(oracle::random_cloud(rng, 3 + i));
    auto cfg = KernelConfig::igv(0.01, kGauss);
    cfg.normalize = true;
    const auto k = kernel_matrix(clouds, cfg);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(k(i, i), 1.0, 1e-12);
    cfg.normalize = false;
    const auto raw = kernel_matrix(clouds, cfg);
    EXPECT_NEAR(k(1, 4), raw(1, 4) / std::sqrt(raw(1, 1) * raw(4, 4)), 1e-12);
}

TEST(KernelMatrix, PositiveSemidefinite) {
    std::mt19937_64 rng(66);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < 10; ++i) clouds.push_back(oracle::random_cloud(rng, 2 + i % 6));
    for (const auto& cfg : {KernelConfig::trace(0.1, kGauss), KernelConfig::igv(0.01, kGauss),
                            KernelConfig::series(choose_delta(clouds, kGauss), kGauss)})
        EXPECT_GE(oracle::min_eigenvalue(kernel_matrix(clouds, cfg)), -1e-8 * 10) << cfg.label();
}

TEST(KernelMatrix, FailureNamesThePair) {
    std::vector<PointCloud> clouds{single(0, 0), single(1, 1), single(0.5, 0.5)};
    auto cfg = KernelConfig::series(50.0, BaseKernelSpec::gaussian(1.0));
    try {
        kernel_matrix(clouds, cfg);
        FAIL() << "expected PairError";
    } catch (const PairError& e) {
        EXPECT_EQ(e.first(), 0u);
        EXPECT_EQ(e.second(), 1u);
        EXPECT_EQ(e.category(), ErrorCategory::Numerical);
    }
}

TEST(KernelMatrix, RecordsSeriesTermHistogram) {
    std::mt19937_64 rng(67);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < 5; ++i) clouds.push_back(oracle::random_cloud(rng, 4));
    KernelMatrixStats stats;
    kernel_matrix(clouds, KernelConfig::series(1, kGauss), {}, &stats);
    std::size_t total = 0;
    for (const auto& [n, count] : stats.series_terms) total += count;
    EXPECT_EQ(total, 15u);
    EXPECT_EQ(stats.pairs, 15u);
}

TEST(ChooseDelta, EqualSizeUniformClouds) {
    std::mt19937_64 rng(68);
    std::vector<PointCloud> clouds;
    for (int i = 0; i < 5; ++i) clouds.push_back(oracle::random_cloud(rng, 7, 2, true));
    EXPECT_NEAR(choose_delta(clouds, kGauss), 0.99, 1e-15);
}

TEST(ChooseDelta, ConservativeForUnequalSizes) {
    std::mt19937_64 rng(69);
    for (int dmin = 1; dmin <= 8; ++dmin)
        for (int dmax = dmin; dmax <= 20; dmax += 3) {
            const std::vector<PointCloud> clouds{oracle::random_cloud(rng, dmin, 2, true), oracle::random_cloud(rng, dmax, 2, true)};
            const double r = double(dmin) / dmax;
            EXPECT_GE(choose_delta(clouds, kGauss), 0.99 * r * r * r * (1 - 1e-12));
        }
}

TEST(ChooseDelta, RequiresBoundedKernel) {
    const std::vector<PointCloud> clouds{single(0, 0)};
    EXPECT_THROW(choose_delta(clouds, BaseKernelSpec::linear()), UnboundedKernelError);
}

TEST(KernelMatrix, OpaqueCloudsThroughItemKernel) {
    std::vector<PointCloud> clouds;
    for (std::uint64_t i = 0; i < 4; ++i)
        clouds.push_back(PointCloud::opaque({ItemHandle{i}, ItemHandle{i + 1}, ItemHandle{i + 2}}, Eigen::Vector3d(1, 1, 1)));
    KernelMatrixOptions opts;
    opts.item_kernel = [](ItemHandle x, ItemHandle y) {
        const double d = double(x.id) - double(y.id);
        return std::exp(-d * d / 2);
    };
    const auto k = kernel_matrix(clouds, KernelConfig::igv(0.1, kGauss), opts);
    EXPECT_EQ(k, k.transpose());
    EXPECT_GE(oracle::min_eigenvalue(k), -1e-10);
    EXPECT_THROW(kernel_matrix(clouds, KernelConfig::igv(0.1, kGauss)), ModeError);
}
