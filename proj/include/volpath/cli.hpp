#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volpath {

// Runs the volpath command line; returns the process exit code (0 ok or check
// passed, 1 check failed or numerical failure, 2 configuration error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace volpath
