#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one command line. args excludes the program name. Human-readable
/// output goes to out, diagnostics to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a key=value config file: '#' starts a comment, blank lines are
/// ignored, whitespace around keys and values is trimmed.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace aelab::cli
