#pragma once

#include <string>
#include <vector>

namespace itele::cli {

/// Runs one command (args exclude the program name). Returns the process
/// exit code: 0 success, 2 usage/config error, 3 data error.
int run(const std::vector<std::string>& args);

}  // namespace itele::cli
