#include "sspd/base_kernel.hpp"

#include "sspd/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <vector>

namespace sspd {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument(fmt::format("cannot parse {} from '{}'", what, text));
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) return parts;
        start = pos + 1;
    }
}

}  // namespace

BaseKernelSpec BaseKernelSpec::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidArgument(fmt::format("Gaussian width must be positive, got {}", sigma));
    return BaseKernelSpec(GaussianKernel{sigma});
}

BaseKernelSpec BaseKernelSpec::linear() { return BaseKernelSpec(LinearKernel{}); }

BaseKernelSpec BaseKernelSpec::polynomial(int degree, double offset) {
    if (degree < 1) throw InvalidArgument(fmt::format("polynomial degree must be >= 1, got {}", degree));
    if (!(offset >= 0.0) || !std::isfinite(offset))
        throw InvalidArgument(fmt::format("polynomial offset must be >= 0, got {}", offset));
    return BaseKernelSpec(PolynomialKernel{degree, offset});
}

BaseKernelSpec BaseKernelSpec::parse(std::string_view text) {
    const auto parts = split(text, ':');
    const auto name = parts.front();
    if (name == "gaussian" && parts.size() == 2) return gaussian(parse_number<double>(parts[1], "sigma"));
    if (name == "linear" && parts.size() == 1) return linear();
    if (name == "poly" && parts.size() == 3)
        return polynomial(parse_number<int>(parts[1], "degree"), parse_number<double>(parts[2], "offset"));
    throw InvalidArgument(
        fmt::format("unknown base kernel '{}' (expected gaussian:SIGMA, linear or poly:DEG:OFFSET)", text));
}

std::string BaseKernelSpec::to_string() const {
    return std::visit(overloaded{
                          [](const GaussianKernel& g) { return fmt::format("gaussian:{}", g.sigma); },
                          [](const LinearKernel&) { return std::string("linear"); },
                          [](const PolynomialKernel& p) { return fmt::format("poly:{}:{}", p.degree, p.offset); },
                      },
                      kind_);
}

double BaseKernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) const {
    if (x.size() != y.size())
        throw ModeError(fmt::format("points have dimensions {} and {}", x.size(), y.size()));
    return std::visit(overloaded{
                          [&](const GaussianKernel& g) {
                              // (x_k - y_k)^2 == (y_k - x_k)^2 bitwise, so this is exactly symmetric.
                              double sq = 0.0;
                              for (Eigen::Index k = 0; k < x.size(); ++k) {
                                  const double diff = x(k) - y(k);
                                  sq += diff * diff;
                              }
                              return std::exp(-sq / (2.0 * g.sigma * g.sigma));
                          },
                          [&](const LinearKernel&) { return x.dot(y); },
                          [&](const PolynomialKernel& p) { return std::pow(x.dot(y) + p.offset, p.degree); },
                      },
                      kind_);
}

double evaluate(const BaseKernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) {
    return spec(x, y);
}

bool is_bounded_by_one(const BaseKernelSpec& spec) noexcept {
    return std::holds_alternative<GaussianKernel>(spec.kind());
}

}  // namespace sspd
