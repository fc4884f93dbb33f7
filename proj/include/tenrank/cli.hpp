#pragma once

#include <string>
#include <vector>

namespace tenrank {

/// Outcome of one CLI invocation; stdout/stderr are captured so callers
/// (and the determinism tests) can compare runs byte for byte.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

/// Runs the tenrank CLI on the given arguments (without argv[0]).
/// Exit codes: 0 success, 2 precondition / numerical failure,
/// 3 malformed input or usage error.
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace tenrank
