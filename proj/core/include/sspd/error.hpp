#pragma once

#include <stdexcept>
#include <string>

namespace sspd {

/// Input errors come from malformed files or arguments; numerical errors
/// from well-formed inputs that violate a mathematical precondition.
enum class ErrorCategory { Input, Numerical };

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ErrorCategory category = ErrorCategory::Numerical)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define SSPD_DECLARE_ERROR(Name, Category)                                           \
    class Name : public Error {                                                      \
    public:                                                                          \
        explicit Name(const std::string& what) : Error(what, ErrorCategory::Category) {} \
    }

// Input
SSPD_DECLARE_ERROR(FormatError, Input);
SSPD_DECLARE_ERROR(InvalidArgument, Input);

// Measures
SSPD_DECLARE_ERROR(ZeroMassError, Numerical);
SSPD_DECLARE_ERROR(MassError, Numerical);
SSPD_DECLARE_ERROR(ModeMismatchError, Numerical);
SSPD_DECLARE_ERROR(NotNormalizedError, Numerical);

// Kernels and Gram matrices
SSPD_DECLARE_ERROR(ModeError, Numerical);
SSPD_DECLARE_ERROR(WeightMismatchError, Numerical);
SSPD_DECLARE_ERROR(AsymmetryError, Numerical);
SSPD_DECLARE_ERROR(NotPSDError, Numerical);
SSPD_DECLARE_ERROR(UnboundedKernelError, Numerical);

// Series and closed forms
SSPD_DECLARE_ERROR(SingularError, Numerical);
SSPD_DECLARE_ERROR(SpectrumTooLargeError, Numerical);
SSPD_DECLARE_ERROR(NonConvergenceError, Numerical);
SSPD_DECLARE_ERROR(ComplexityError, Numerical);

// Evaluation harness
SSPD_DECLARE_ERROR(EmptyImageError, Numerical);
SSPD_DECLARE_ERROR(SolverDivergenceError, Numerical);

#undef SSPD_DECLARE_ERROR

/// Raised by the series kernel when delta times the spectral radius of the
/// centered Gram matrix is not safely below one.
class DeltaTooLargeError : public Error {
public:
    DeltaTooLargeError(double delta, double rho);

    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }

private:
    double delta_;
    double rho_;
};

/// Wraps the first failing pair of a kernel-matrix computation.
class PairError : public Error {
public:
    PairError(std::size_t i, std::size_t j, const Error& cause);

    [[nodiscard]] std::size_t first() const noexcept { return i_; }
    [[nodiscard]] std::size_t second() const noexcept { return j_; }

private:
    std::size_t i_;
    std::size_t j_;
};

}  // namespace sspd
