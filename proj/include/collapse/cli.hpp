#pragma once

#include <string>
#include <vector>

namespace collapse {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitVerifyFailed = 3,
  kExitRefused = 4,
};

/// Entry point for the collapse-sim tool. `args` excludes the program name.
/// Subcommands: simulate, analyze, verify, plotdata.
int run_cli(const std::vector<std::string>& args);

}  // namespace collapse
