#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semisar {

/// Runs the command-line interface. Returns 0 on success, 1 on invalid input
/// and 2 on numerical failure; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace semisar
