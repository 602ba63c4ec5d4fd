#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hybridfpca::cli {

/// Runs one command line (args excludes the program name). Returns the
/// process exit code: 0 success, 2 invalid config or input, 3 numerical
/// failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hybridfpca::cli
