#pragma once

namespace spraycp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `spraycp` tool. Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace spraycp::cli
