#include "sspd/error.hpp"

#include <fmt/format.h>

namespace sspd {

DeltaTooLargeError::DeltaTooLargeError(double delta, double rho)
    : Error(fmt::format("delta {:.6g} too large: estimated spectral radius rho = {:.9g}, "
                        "delta * rho = {:.6g} (need delta * rho * 1.01 < 1)",
                        delta, rho, delta * rho)),
      delta_(delta),
      rho_(rho) {}

PairError::PairError(std::size_t i, std::size_t j, const Error& cause)
    : Error(fmt::format("pair ({}, {}): {}", i, j, cause.what()), cause.category()), i_(i), j_(j) {}

}  // namespace sspd
