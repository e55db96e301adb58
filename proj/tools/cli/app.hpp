#pragma once

#include <iosfwd>

#include "tbcv/error.hpp"

namespace tbcv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// 2 for configuration, usage and I/O problems; 3 for numeric failures.
int exit_code_for(ErrorKind kind);

/// Full command line: parses, runs and returns the process exit status. Diagnostics go to `err`
/// as one JSON object per line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tbcv::cli
