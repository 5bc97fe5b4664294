#pragma once

#include "sspd/measures.hpp"
#include "sspd/series.hpp"

#include <Eigen/Core>

#include <vector>

namespace sspd {

/// Variance matrix mu[x x^T] - mu[x] mu[x]^T of a Euclidean measure.
class VarianceMatrix {
public:
    /// Validates symmetry (1e-12) and positive semidefiniteness
    /// (min eigenvalue >= -1e-10 |Sigma|).
    static VarianceMatrix from_matrix(Eigen::MatrixXd sigma);

    [[nodiscard]] const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return sigma_.rows(); }

    /// Descending, with rounding-level negatives clamped to zero.
    [[nodiscard]] std::vector<double> eigenvalues() const;

private:
    explicit VarianceMatrix(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {}
    Eigen::MatrixXd sigma_;
};

/// Throws MassError when the cloud's mass exceeds 1 + 1e-9.
VarianceMatrix variance(const PointCloud& cloud);

/// tr Sigma.
double psi_tr(const VarianceMatrix& sigma);

/// det(Sigma / eta + I)^{-1/2}, the inverse generalized variance.
double psi0(const VarianceMatrix& sigma, double eta);

/// sum over j in N^n with |j| = i of prod_k Gamma(j_k + 1/2) / lambda_k^{j_k}.
/// Requires every eigenvalue above 1e-12 (SingularError) and 0 <= i <= n.
double gamma_i(const VarianceMatrix& sigma, int i);

/// Closed form of the integral of exp(-y^T Sigma y) (y^T y)^i over R^n,
/// i.e. gamma_i(Sigma) / sqrt(det Sigma).
double psi_power_integral(const VarianceMatrix& sigma, int i);

/// Lancaster-type closed forms for i = 1, 2, 3 with prefactor
/// sigma_n / sqrt(det Sigma), sigma_n = (2 / sqrt(pi))^{n/2}.
double psi_lancaster(const VarianceMatrix& sigma, int i);

/// Partial sum (k = 0..terms) of the density of t = y^T y under
/// exp(-y^T Sigma y) dy. Requires spectrum below 1.
double f_mu_density(const VarianceMatrix& sigma, double t, int terms);

/// Partial sum (k = 0..terms) of the Laplace transform of f_mu at s >= 1,
/// pi^{n/2} sum_k (-1)^k c_k s^{-n/2-k}. Requires spectrum below s.
double laplace_L(const VarianceMatrix& sigma, double s, int terms);

/// Result of the adaptively truncated alternating series.
struct SeriesValue {
    double value = 1.0;
    int terms = 0;
};

/// sum_k (-1)^k c_k with d_k = tr(Sigma^k) / 2. Requires spectrum below 1.
SeriesValue psi_M_series(const VarianceMatrix& sigma, const SeriesTolerance& tolerance = {});
double psi_M_variance(const VarianceMatrix& sigma, const SeriesTolerance& tolerance = {});

}  // namespace sspd
