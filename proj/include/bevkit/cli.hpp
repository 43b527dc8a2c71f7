#pragma once

#include <string>
#include <vector>

namespace bevkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 64;

/// Parses argv (program name first) and runs one subcommand. Logs go to
/// stderr; the return value is the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace bevkit::cli
