#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ebdg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitUnstable = 2,
  kExitNumerical = 3,
};

/// Parses argv (argv[0] is the program name), runs the subcommand and maps
/// library errors onto exit codes.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ebdg::cli
