#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mabfdr::cli {

enum ExitCode : int {
    kOk = 0,
    kReplayMismatch = 1,
    kConfigError = 2,
    kDataError = 3,
};

/// Runs one CLI invocation. `args` excludes the program name. Subcommands:
/// simulate, sweep, replay.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mabfdr::cli
