#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace msrd {

struct Artifact {
    std::string name;  // file name relative to the output directory
    std::string data;
};

struct CommandResult {
    int exit_code = 0;  // 0 ok, 1 runtime failure, 2 validation failure, 3 check failure
    std::vector<Artifact> artifacts;
    std::string summary;      // human-readable, deterministic
    std::string diagnostics;  // runtimes and other run-dependent text
    std::string failure;      // event_cap | positivity | nonconvergent | runtime when exit_code == 1
};

// Subcommands: validate, simulate, solve-limit, spectral-check, martingale-check, lln-sweep.
const std::vector<std::string>& command_names();

// Runs one subcommand on a resolved config. Artifacts embed the config and version.
// Throws std::invalid_argument for an unknown command or out-of-range parameters.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

// Config as embedded in artifacts: run-invariant fields only (no output_dir, no workers).
nlohmann::json artifact_config(const RunConfig& cfg);

}  // namespace msrd
