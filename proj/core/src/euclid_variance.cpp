#include "sspd/euclid_variance.hpp"

#include "sspd/error.hpp"
#include "sspd/gram.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace sspd {
namespace {

constexpr double kSingularTolerance = 1e-12;
constexpr double kMaxCompositions = 5e6;

std::vector<double> positive_spectrum(const VarianceMatrix& sigma) {
    auto values = sigma.eigenvalues();
    for (double v : values) {
        if (v <= kSingularTolerance)
            throw SingularError(fmt::format("variance matrix is singular (eigenvalue {:.3g})", v));
    }
    return values;
}

double check_below(const VarianceMatrix& sigma, double limit) {
    const auto values = sigma.eigenvalues();
    const double rho = values.empty() ? 0.0 : values.front();
    if (rho >= limit)
        throw SpectrumTooLargeError(
            fmt::format("largest eigenvalue {:.9g} is not strictly below {:.9g}", rho, limit));
    return rho;
}

// c_0..c_terms for the power sums of the spectrum.
std::vector<double> series_coefficients(const std::vector<double>& lambdas, int terms) {
    AlternatingSeries series;
    std::vector<double> powers(lambdas.size(), 1.0);
    for (int k = 1; k <= terms; ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            powers[i] *= lambdas[i];
            d += powers[i];
        }
        series.push(0.5 * d);
    }
    return series.coefficients();
}

double binomial(int n, int k) {
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

}  // namespace

VarianceMatrix VarianceMatrix::from_matrix(Eigen::MatrixXd sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
        throw InvalidArgument(fmt::format("variance matrix must be square, got {}x{}", sigma.rows(), sigma.cols()));
    if (!sigma.allFinite()) throw InvalidArgument("variance matrix has non-finite entries");
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw AsymmetryError(fmt::format("variance matrix asymmetry {:.3g}", asym));
    VarianceMatrix out(std::move(sigma));
    (void)out.eigenvalues();
    return out;
}

std::vector<double> VarianceMatrix::eigenvalues() const { return clamped_spectrum(sigma_, 1e-10); }

VarianceMatrix variance(const PointCloud& cloud) {
    if (cloud.mode() != PointMode::Euclidean) throw ModeError("variance requires a Euclidean cloud");
    const double mass = cloud.mass();
    if (mass > 1.0 + 1e-9)
        throw MassError(fmt::format("mass {:.17g} exceeds 1; the variance is not guaranteed PSD", mass));

    // mu[(x - m)(x - m)^T] + (1 - |mu|) m m^T with m = mu[x]; equal to
    // mu[x x^T] - m m^T but without the cancellation.
    const Eigen::VectorXd m = cloud.mean();
    const Eigen::MatrixXd centered = cloud.points().colwise() - m;
    Eigen::MatrixXd sigma = centered * cloud.weights().asDiagonal() * centered.transpose();
    sigma += (1.0 - mass) * m * m.transpose();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    return VarianceMatrix::from_matrix(std::move(sigma));
}

double psi_tr(const VarianceMatrix& sigma) { return sigma.sigma().trace(); }

double psi0(const VarianceMatrix& sigma, double eta) {
    if (!(eta > 0.0)) throw InvalidArgument(fmt::format("eta must be positive, got {}", eta));
    double log_det = 0.0;
    for (double v : sigma.eigenvalues()) log_det += std::log1p(v / eta);
    return std::exp(-0.5 * log_det);
}

double gamma_i(const VarianceMatrix& sigma, int i) {
    const int n = static_cast<int>(sigma.dim());
    if (i < 0 || i > n) throw InvalidArgument(fmt::format("order {} outside 0..{}", i, n));
    const auto lambdas = positive_spectrum(sigma);
    if (binomial(i + n - 1, i) > kMaxCompositions)
        throw ComplexityError(fmt::format("{} compositions of {} into {} parts is too many",
                                          binomial(i + n - 1, i), i, n));
    if (i == 0) return 1.0;

    // table[k][j] = Gamma(j + 1/2) / lambda_k^j
    std::vector<std::vector<double>> table(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto& row = table[static_cast<std::size_t>(k)];
        for (int j = 0; j <= i; ++j) row.push_back(std::tgamma(j + 0.5) / std::pow(lambdas[static_cast<std::size_t>(k)], j));
    }

    // Depth-first walk over compositions of i into n nonnegative parts.
    double total = 0.0;
    auto walk = [&](auto&& self, int k, int remaining, double product) -> void {
        const auto& row = table[static_cast<std::size_t>(k)];
        if (k == n - 1) {
            total += product * row[static_cast<std::size_t>(remaining)];
            return;
        }
        for (int j = 0; j <= remaining; ++j) self(self, k + 1, remaining - j, product * row[static_cast<std::size_t>(j)]);
    };
    walk(walk, 0, i, 1.0);
    return total;
}

double psi_power_integral(const VarianceMatrix& sigma, int i) {
    const double g = gamma_i(sigma, i);
    double log_det = 0.0;
    for (double v : sigma.eigenvalues()) log_det += std::log(v);
    return g * std::exp(-0.5 * log_det);
}

double psi_lancaster(const VarianceMatrix& sigma, int i) {
    if (i < 1 || i > 3) throw InvalidArgument(fmt::format("closed forms exist for i = 1, 2, 3; got {}", i));
    const auto lambdas = positive_spectrum(sigma);
    const double n = static_cast<double>(lambdas.size());
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, log_det = 0.0;
    for (double v : lambdas) {
        const double inv = 1.0 / v;
        t1 += inv;
        t2 += inv * inv;
        t3 += inv * inv * inv;
        log_det += std::log(v);
    }
    const double sigma_n = std::pow(2.0 / std::sqrt(std::numbers::pi), n / 2.0);
    const double prefactor = sigma_n * std::exp(-0.5 * log_det);
    switch (i) {
        case 1: return prefactor * t1;
        case 2: return prefactor * (t1 * t1 + 2.0 * t2);
        default: return prefactor * (t1 * t1 * t1 + 6.0 * t1 * t2 + 8.0 * t3);
    }
}

double f_mu_density(const VarianceMatrix& sigma, double t, int terms) {
    if (!(t > 0.0)) throw InvalidArgument(fmt::format("t must be positive, got {}", t));
    if (terms < 0) throw InvalidArgument("number of terms must be nonnegative");
    check_below(sigma, 1.0);
    const double half_n = 0.5 * static_cast<double>(sigma.dim());
    const auto c = series_coefficients(sigma.eigenvalues(), terms);
    const double log_t = std::log(t);
    double sum = 0.0;
    for (int k = 0; k <= terms; ++k) {
        const double magnitude = std::exp((half_n + k - 1.0) * log_t - std::lgamma(half_n + k));
        sum += ((k % 2 == 0) ? 1.0 : -1.0) * c[static_cast<std::size_t>(k)] * magnitude;
    }
    return std::pow(std::numbers::pi, half_n) * sum;
}

double laplace_L(const VarianceMatrix& sigma, double s, int terms) {
    if (!(s >= 1.0)) throw InvalidArgument(fmt::format("s must be >= 1, got {}", s));
    if (terms < 0) throw InvalidArgument("number of terms must be nonnegative");
    check_below(sigma, s);
    const double half_n = 0.5 * static_cast<double>(sigma.dim());
    const auto c = series_coefficients(sigma.eigenvalues(), terms);
    double sum = 0.0;
    double power = std::pow(s, -half_n);
    for (int k = 0; k <= terms; ++k) {
        sum += ((k % 2 == 0) ? 1.0 : -1.0) * c[static_cast<std::size_t>(k)] * power;
        power /= s;
    }
    return std::pow(std::numbers::pi, half_n) * sum;
}

SeriesValue psi_M_series(const VarianceMatrix& sigma, const SeriesTolerance& tolerance) {
    check_below(sigma, 1.0);
    TracePowerSequence traces(sigma.sigma());
    AlternatingSeries series;
    int small_run = 0;
    while (series.terms() < tolerance.max_terms) {
        const double c_k = series.push(0.5 * traces.next());
        small_run = std::abs(c_k) < tolerance.relative * (1.0 + std::abs(series.partial_sum())) ? small_run + 1 : 0;
        if (small_run >= tolerance.consecutive) return {series.partial_sum(), series.terms()};
    }
    throw NonConvergenceError(
        fmt::format("series did not meet its stop rule within {} terms", tolerance.max_terms));
}

double psi_M_variance(const VarianceMatrix& sigma, const SeriesTolerance& tolerance) {
    return psi_M_series(sigma, tolerance).value;
}

}  // namespace sspd
