#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zyn::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;    // unreadable input, invalid config or schema
inline constexpr int kExitPartial = 2;  // some items failed, or statistics were undefined

/// Runs the `zyn` command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zyn::cli
