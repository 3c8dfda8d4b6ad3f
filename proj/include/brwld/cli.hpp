#pragma once

#include <iosfwd>

namespace brwld {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfigError = 2,
  kExitSimulationAbort = 3,
  kExitResourceLimit = 4,
};

/// Entry point for the `brwld` command line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace brwld
