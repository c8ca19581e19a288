#pragma once
// Command-line front end: single-scenario analysis, simulation
// cross-validation, state-space size tables, and parameter sweeps. Emits
// CSV plot data; see README for schemas.

#include <string>
#include <vector>

namespace aoi {

// Exit codes: 0 success, 1 numerical failure or threshold breach,
// 2 usage error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace aoi
