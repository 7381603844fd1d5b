#pragma once

#include <iosfwd>

namespace rmps {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Entry point of the rmps command line tool. Commands: sample, sweep,
/// verify, histogram. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rmps
