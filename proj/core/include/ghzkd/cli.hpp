#pragma once

#include <string>
#include <vector>

#include "ghzkd/montecarlo.hpp"

namespace ghzkd {

// Parses command-line arguments (argv[0] is the program name). Throws
// CLI::ParseError for usage problems and std::invalid_argument for value
// problems; run_cli maps those to exit codes.
ExperimentConfig parse_cli(const std::vector<std::string>& argv);

// Full program: parse, run, print summary, write outputs.
// Exit codes: 0 success, 1 configuration error, 2 i/o error.
int run_cli(int argc, const char* const* argv);

}  // namespace ghzkd
