#pragma once

#include <string>
#include <vector>

namespace evcoord {

// Drives one command-line invocation; `args` excludes the program name.
// Returns the process exit code (0 success, 1 usage or configuration
// problem, 2 numerical failure, 3 infeasible fleet) instead of exiting,
// so tests can call it in-process.
int run_cli(const std::vector<std::string>& args);

}  // namespace evcoord
