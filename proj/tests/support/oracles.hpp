#pragma once

// Independent reference computations for the tests. Everything here is
// written from the textbook definitions with dense linear algebra and shares
// no code with the library beyond its value types.

#include "sspd/measures.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd uniform_points(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index count, double lo = 0.0,
                                      double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd p(dim, count);
    for (Eigen::Index j = 0; j < count; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) p(i, j) = u(rng);
    return p;
}

inline Eigen::VectorXd random_weights(std::mt19937_64& rng, Eigen::Index count) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::VectorXd w(count);
    for (Eigen::Index i = 0; i < count; ++i) w(i) = u(rng);
    return w / w.sum();
}

inline sspd::PointCloud random_cloud(std::mt19937_64& rng, Eigen::Index count, Eigen::Index dim = 2,
                                     bool uniform = false, double scale = 1.0) {
    Eigen::MatrixXd p = uniform_points(rng, dim, count) * scale;
    if (uniform) return sspd::PointCloud::euclidean(std::move(p));
    return sspd::PointCloud::euclidean(std::move(p), random_weights(rng, count));
}

inline double gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma) {
    return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

/// Joint Gram matrix by an explicit double loop over the concatenated support.
inline Eigen::MatrixXd joint_gram(const sspd::PointCloud& a, const sspd::PointCloud& b,
                                  const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& k) {
    Eigen::MatrixXd x(a.dim(), a.size() + b.size());
    x << a.points(), b.points();
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = k(x.col(i), x.col(j));
    return g;
}

inline Eigen::VectorXd mixture_weights(const sspd::PointCloud& a, const sspd::PointCloud& b) {
    Eigen::VectorXd w(a.size() + b.size());
    w << 0.5 * a.weights(), 0.5 * b.weights();
    return w;
}

/// (I - 1 w^T) K (I - w 1^T) diag(w), literally.
inline Eigen::MatrixXd centered_raw(const Eigen::MatrixXd& k, const Eigen::VectorXd& w) {
    const Eigen::Index n = k.rows();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, n);
    const Eigen::MatrixXd d = w.asDiagonal();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return (id - ones * d) * k * (id - d * ones) * d;
}

/// D^{1/2} (I - 1 w^T) K (I - w 1^T) D^{1/2}, literally.
inline Eigen::MatrixXd centered_sym(const Eigen::MatrixXd& k, const Eigen::VectorXd& w) {
    const Eigen::Index n = k.rows();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, n);
    const Eigen::MatrixXd d = w.asDiagonal();
    const Eigen::MatrixXd h = w.cwiseSqrt().asDiagonal();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    return h * (id - ones * d) * k * (id - d * ones) * h;
}

inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd s = 0.5 * (m + m.transpose());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues();
}

/// det(I + S / eta)^{-1/2} through an LU determinant (no eigenvalues).
inline double inv_sqrt_det(const Eigen::MatrixXd& s, double eta) {
    const Eigen::Index n = s.rows();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + s / eta;
    return 1.0 / std::sqrt(m.partialPivLu().determinant());
}

/// Sigma = sum_i a_i x_i x_i^T - m m^T with m = sum_i a_i x_i, by brute force.
inline Eigen::MatrixXd variance(const Eigen::MatrixXd& points, const Eigen::VectorXd& w) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        second += w(i) * points.col(i) * points.col(i).transpose();
        m += w(i) * points.col(i);
    }
    return second - m * m.transpose();
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// Random symmetric matrix with the given spectrum.
inline Eigen::MatrixXd with_spectrum(std::mt19937_64& rng, const Eigen::VectorXd& lambda) {
    const Eigen::MatrixXd q = random_orthogonal(rng, lambda.size());
    Eigen::MatrixXd s = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) { return sym_eigenvalues(m).minCoeff(); }

inline std::vector<double> nonzero_sorted(const Eigen::VectorXd& v, double floor) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) > floor) out.push_back(v(i));
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

}  // namespace oracle
