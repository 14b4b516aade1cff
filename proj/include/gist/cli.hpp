#pragma once

#include <iosfwd>

namespace gist {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitVerification = 2;
inline constexpr int kExitIo = 3;

/// Entry point of the `gist` tool. Normal output goes to `out`, diagnostics
/// to `err`; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gist
