#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace segvote {

/// Exit codes of the segvote command line.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitIo = 2,
  kExitVerdict = 3,
};

/// Run the segvote command line. `args` excludes the program name.
/// Config echo and results go to `out`; timings and thread counts go to
/// `log` so that `out` is a pure function of the arguments.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& log);

}  // namespace segvote
