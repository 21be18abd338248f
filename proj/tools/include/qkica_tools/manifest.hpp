#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qkica_tools/config.hpp"

namespace qkica::tools {

// Run record written next to the outputs. It embeds the full config, so
// `qkica <command> --config manifest.json` repeats the run.
struct Manifest {
    std::string command;
    nlohmann::json config;
    std::vector<std::string> outputs;
    nlohmann::json summary = nlohmann::json::object();

    nlohmann::json to_json() const;
    void write(const std::string& path) const;
};

nlohmann::json version_info();

} // namespace qkica::tools
