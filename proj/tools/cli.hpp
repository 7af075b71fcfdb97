#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sepscope::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

/// Runs the command line `args` (without the program name). Human-readable progress goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sepscope::cli
