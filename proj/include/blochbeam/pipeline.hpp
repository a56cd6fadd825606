#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blochbeam/config.hpp"

namespace blochbeam {

const std::vector<std::string>& command_names();

// Executes one command end to end: builds the solver, writes the config
// echo and the artifacts into out_dir, and returns the JSON summary (also
// written to out_dir/summary.json).
nlohmann::json run_command(const std::string& cmd, const run_config& cfg,
                           const std::string& out_dir);

}  // namespace blochbeam
