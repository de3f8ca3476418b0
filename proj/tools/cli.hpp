#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace actmon::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

/// Runs the `actmon` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace actmon::cli
