#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opsplit::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kVerificationFailed = 1, kUsageError = 2 };

/// Runs the command line `args` (args[0] is the program name). JSON goes to
/// `--out` when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opsplit::cli
