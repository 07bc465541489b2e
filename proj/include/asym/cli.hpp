#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace asym::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUndecided = 2;
inline constexpr int kExitCriteriaFailed = 3;

/// Parses `args` (without the program name), runs one subcommand and writes
/// its artifacts plus manifest.json below --out. Exit codes: 0 success,
/// 1 invalid input or config, 2 Undecided feasibility under --strict,
/// 3 failing suite criteria.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(int argc, char** argv);

}  // namespace asym::cli
