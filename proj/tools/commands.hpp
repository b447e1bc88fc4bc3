#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tlbm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kNumericalFailure = 2,
  kExpectationViolated = 3,
};

/// Runs the tool with args (without the program name), writing to out and err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tlbm::cli
