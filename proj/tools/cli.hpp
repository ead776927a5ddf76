#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vartsp/settings.hpp"

namespace vartsp::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kResourceLimit = 3,
  kDataError = 4,
};

// Entry point behind main(); args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Settings a `solve` invocation would use, from its arguments (after the
// subcommand name). Throws ConfigError on bad flags.
RunSettings solve_settings(const std::vector<std::string>& args);

}  // namespace vartsp::cli
