#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hsnli::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitGridFailures = 3;

// Runs one subcommand. Errors are reported as a single "error: <kind>: <msg>"
// line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hsnli::cli
