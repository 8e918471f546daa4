#pragma once

#include <iosfwd>

namespace eedc::cli {

/// Exit statuses of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kGate = 3,
  kNumerical = 4,
};

/// Parses argv, dispatches one subcommand and returns its exit status.
/// Tables go to `out`; one-line diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eedc::cli
