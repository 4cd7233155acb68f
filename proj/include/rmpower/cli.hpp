#pragma once

#include <iosfwd>

namespace rmpower::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCompute = 1;
inline constexpr int kExitUsage = 2;

/// Subcommands: power, nsize, mde, curve, anova, convert, simulate, serve.
/// Returns 0 on success, 2 on usage errors, 1 when the computation fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmpower::cli
