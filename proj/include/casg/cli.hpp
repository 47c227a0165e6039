#pragma once

#include <iosfwd>

namespace casg {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,      ///< bad flags or configuration, unreadable input
  kExitNumerical = 3,  ///< a numerical stage failed
  kExitPartial = 4,    ///< some runs failed; listed in the summary
};

/// Entry point of the `casg` tool. Machine-readable JSON goes to `out`,
/// usage text and log lines to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace casg
