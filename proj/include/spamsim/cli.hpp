#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spamsim {

/// Exit codes of the spamsim command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,        // bad arguments or config
  kExitIo = 3,           // unreadable input or unwritable output
  kExitInseparable = 4,  // threshold calibration on overlapping distributions
};

/// Runs the tool on `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

const char* version();

}  // namespace spamsim
