#pragma once

// Command-line front end. Exit codes: 0 pass, 2 configuration or usage error,
// 3 numerical solve failure, 4 validation failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace shapegrad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolve = 3;
inline constexpr int kExitValidation = 4;

/// Runs one command; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shapegrad
