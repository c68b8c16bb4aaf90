#pragma once

// Command-line driver: pair-analyze, geodesic, webbing, verify.

#include <iosfwd>
#include <string>
#include <vector>

#include "lagweb/error.hpp"

namespace lagweb::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNoConvergence = 3,
  kVerification = 4,
};

int exit_code(ErrorKind kind);

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lagweb::cli
