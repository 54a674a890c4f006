// Command-line front end: simulate, fit, wine and plot subcommands.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tlreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// args excludes the program name. Returns the process exit code; errors go
/// to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tlreg::cli
