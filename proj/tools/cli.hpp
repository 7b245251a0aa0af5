#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbct::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kIOError = 3,
    kSolverBreakdown = 4,
};

/// Runs the command line front end with argv style arguments (program name
/// excluded). Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cbct::cli
