#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tpa::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageOrIo = 1,
  kPhysics = 2,
  kFitNotConverged = 3,
};

/// Runs the tapertpa command line with `args` (excluding the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tpa::cli
