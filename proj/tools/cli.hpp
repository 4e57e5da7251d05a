#pragma once

#include <iosfwd>

namespace betadpd::cli {

enum ExitCode : int {
  kOk = 0,
  kParseOrIo = 1,
  kModel = 2,
  kNotConverged = 3,
};

/// Runs one command line (argv[0] is the program name). Reports go to `out`
/// unless --out / --out-dir redirect them; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace betadpd::cli
