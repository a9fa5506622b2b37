#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace binbell {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitFit = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace binbell
