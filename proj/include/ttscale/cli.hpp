#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ttscale::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `ttscale` tool. Returns 0 on success, 1 on an
/// operational error (bad input, schema violation, unreachable backend) and 2
/// on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttscale::cli
