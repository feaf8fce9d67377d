#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace frdim::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kVerifyFailed = 3 };

/// Runs one command. argv[0] is the program name. Results go to `out`,
/// the effective configuration and diagnostics to `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace frdim::cli
