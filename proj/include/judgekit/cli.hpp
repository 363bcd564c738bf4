#pragma once

#include <iosfwd>

namespace judgekit::cli {

/// Runs the judgekit command line. Returns the process exit code: 0 on
/// success, 2 input error, 3 provider error, 4 internal error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace judgekit::cli
