#include <string>
#include <vector>

#include "cli/app.hpp"

int main(int argc, char** argv) { return auw::cli::run_cli(std::vector<std::string>(argv, argv + argc)); }
