#pragma once

#include <iosfwd>

namespace deconv::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitData = 3,
    kExitNumerical = 4,
};

/// Parses argv, runs the subcommand and maps failures onto exit codes.
/// Diagnostics go to `err`; documents go to --out or standard output.
int run_cli(int argc, const char* const* argv, std::ostream& err);

}  // namespace deconv::cli
