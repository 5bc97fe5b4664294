#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <variant>

namespace sspd {

/// exp(-|x - y|^2 / (2 sigma^2))
struct GaussianKernel {
    double sigma = 1.0;
};

/// x . y
struct LinearKernel {};

/// (x . y + offset)^degree
struct PolynomialKernel {
    int degree = 2;
    double offset = 0.0;
};

/// The prior kernel on the point space.
class BaseKernelSpec {
public:
    using Kind = std::variant<GaussianKernel, LinearKernel, PolynomialKernel>;

    static BaseKernelSpec gaussian(double sigma);
    static BaseKernelSpec linear();
    static BaseKernelSpec polynomial(int degree, double offset);

    /// Parses `gaussian:0.1`, `linear` or `poly:2:1.0`.
    static BaseKernelSpec parse(std::string_view text);

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& y) const;

private:
    explicit BaseKernelSpec(Kind kind) : kind_(kind) {}
    Kind kind_;
};

double evaluate(const BaseKernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y);

/// True when sup_x |k(x, x)| <= 1 on the whole space.
bool is_bounded_by_one(const BaseKernelSpec& spec) noexcept;

}  // namespace sspd
