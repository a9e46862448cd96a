#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tap::cli {

inline constexpr int kOk = 0;
inline constexpr int kInfeasible = 1;
inline constexpr int kUsage = 2;
inline constexpr int kInternal = 3;

/// Runs one subcommand; args[0] is the program name. Results go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace tap::cli
