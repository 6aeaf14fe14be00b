#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdglue {

// Entry point of the hdglue tool. Returns 0 on success, 1 on library errors,
// 2 on command-line errors (unknown subcommand, bad flags).
int cli_main(int argc, const char* const* argv);

// Same, with explicit arguments (args[0] is the program name) and streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdglue
