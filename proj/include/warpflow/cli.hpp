#pragma once

#include <string>

#include "warpflow/config.hpp"

namespace warpflow {

// Exit codes: 0 pass, 2 config error, 3 numerical failure, 4 assertion failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAssertion = 4;

// Executes one run and writes its artifacts (CSV series, snapshots, JSON
// summary) under cfg.out_dir. Returns the process exit code.
int run_command(const RunConfig& cfg);

// Aggregates the recorded verdicts of a completed run directory into a
// PASS/FAIL document (verdict.json) and returns the exit code.
int report(const std::string& run_dir);

}  // namespace warpflow
