#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace augtrunc {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitNotConverged = 4,
};

/// Subcommands sweep, solve, variance and simulate. `args` excludes the
/// program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace augtrunc
