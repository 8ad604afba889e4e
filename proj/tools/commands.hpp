#pragma once

#include <string>
#include <vector>

namespace graphsamp_cli {

// Parses and dispatches one command line (argv without the program name).
// Returns the process exit code. Error-code map: 2 bad arguments/config,
// 3 generation failure, 4 unqualified set, 5 shape mismatch, 1 other errors.
int run(const std::vector<std::string>& args);

}  // namespace graphsamp_cli
