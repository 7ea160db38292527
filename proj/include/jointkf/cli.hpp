#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jointkf::cli {

/// Exit codes: 0 success, 1 internal error, 2 user or input error.
enum ExitCode : int { kOk = 0, kInternalError = 1, kUserError = 2 };

/// Runs one command line (args[0] is the program name). Diagnostics go to
/// `err`; all data goes to files.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace jointkf::cli
