#pragma once

#include <string>
#include <vector>

namespace wgspec {

// Command-line entry point; args are the tokens after the program name.
// Subcommands: simulate | fit | power-series | temp-series | beta-map |
// calibrate. Returns 0 on success, 2 on usage errors, 1 otherwise (with a
// machine-readable error record on stderr).
int run_command(const std::vector<std::string>& args);

}  // namespace wgspec
