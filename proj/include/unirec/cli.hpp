#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace unirec {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs `unirec <args...>`; args excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Parses `start:stop:step`, `start:stop` (step 1) or a single value. The stop
/// value is included when within 1e-9 of the last step.
std::vector<double> parse_range(const std::string &text);

} // namespace unirec
