#pragma once

#include <iosfwd>

namespace shiftgen {

/// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_fail = 1, exit_config = 2 };

/// Runs one subcommand (simulate-maxstable, exponent, transform, verify, integrate, validate).
/// Reports go to stdout and to files under --out; diagnostics go to `err`.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shiftgen
