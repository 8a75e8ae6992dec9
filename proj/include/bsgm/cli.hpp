#pragma once

#include <string>
#include <vector>

namespace bsgm {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 runtime failure, 2 input or configuration error.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitInput = 2 };

/**
 * @brief Command-line entry point.
 *
 * Commands: simulate, fit, effects, tune, diagnose, verify, study. Every
 * command takes --seed, --out and --config; outputs go to --out only, each
 * directory receiving one run_manifest.json written last.
 */
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);  // args excludes the program name

}  // namespace bsgm
