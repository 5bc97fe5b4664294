#pragma once

#include <ostream>

namespace sspd::cli {

/// Exit codes: 0 success, 2 usage or input errors, 3 numerical errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sspd::cli
