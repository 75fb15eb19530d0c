#pragma once

#include <iosfwd>

namespace mocap::cli {

enum ExitCode { kOk = 0, kUsage = 1, kFailure = 2 };

/// Runs the command line tool. Normal output goes to `out`, usage text and
/// errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mocap::cli
