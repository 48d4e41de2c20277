#pragma once

#include <iosfwd>

namespace difact::cli {

/// Parses and runs one CLI invocation.  Primary output goes to `out` (or to
/// the --out file when given), diagnostics to `err`.
/// Exit codes: 0 success, 2 attempts exhausted, 3 rejected input,
/// 4 resource guard exceeded.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace difact::cli
