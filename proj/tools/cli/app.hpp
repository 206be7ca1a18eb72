#pragma once

#include <string>
#include <vector>

namespace auw::cli {

/// Entry point of the `auw` tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace auw::cli
