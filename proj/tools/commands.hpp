#pragma once

#include <iosfwd>

#include "config.hpp"

namespace csr::cli {

/// Exit codes: 0 when every episode completed, 1 when some failed, 2 for a
/// configuration or I/O error (reported before any episode runs).
inline constexpr int kExitOk = 0;
inline constexpr int kExitEpisodesFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand and writes its files under config.out. Progress and
/// errors go to `log`. Throws ConfigError if the output directory cannot be
/// created or written.
int run_command(const RunConfig& config, std::ostream& log);

}  // namespace csr::cli
