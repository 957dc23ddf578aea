#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace finsler {

// Exit codes of finsler-lab.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFailedVerdict = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Runs one finsler-lab invocation; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace finsler
