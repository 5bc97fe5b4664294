#pragma once

// Direct numerical quadrature of the pushforward density of y^T y under
// exp(-y^T S y) dy, and of its Laplace transform, for n <= 3.

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>

namespace quad {

using boost::math::quadrature::gauss;

/// Density of t = y^T y under exp(-y^T S y) dy, by integrating over the
/// sphere of radius sqrt(t) in polar / spherical coordinates.
inline double sphere_density(const Eigen::MatrixXd& s, double t) {
    const auto n = s.rows();
    if (n == 1) return std::exp(-s(0, 0) * t) / std::sqrt(t);
    if (n == 2) {
        auto f = [&](double th) {
            const Eigen::Vector2d u(std::cos(th), std::sin(th));
            return std::exp(-t * u.dot(s * u));
        };
        return 0.5 * gauss<double, 60>::integrate(f, 0.0, 2 * std::numbers::pi);
    }
    auto outer = [&](double th) {
        auto inner = [&](double ph) {
            const Eigen::Vector3d u(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            return std::exp(-t * u.dot(s * u));
        };
        return std::sin(th) * gauss<double, 60>::integrate(inner, 0.0, 2 * std::numbers::pi);
    };
    return 0.5 * std::sqrt(t) * gauss<double, 60>::integrate(outer, 0.0, std::numbers::pi);
}

/// Laplace transform of the quadrature density.
inline double laplace(const Eigen::MatrixXd& s, double sv) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double t) { return std::exp(-sv * t) * sphere_density(s, t); }, 1e-10);
}

}  // namespace quad
