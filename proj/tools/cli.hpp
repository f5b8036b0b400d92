#pragma once

#include <iosfwd>

namespace alignlab::cli {

enum ExitCode : int {
  ok = 0,
  usage = 2,      // bad flags, invalid config or input shape
  io = 3,         // unreadable or unwritable files, malformed file contents
  numerical = 4,  // domain errors, divergence, failed sweeps
};

/// Entry point shared by the executable and the tests. Writes results to
/// `out` (or to the --out file) and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alignlab::cli
