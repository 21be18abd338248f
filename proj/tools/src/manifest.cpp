#include "qkica_tools/manifest.hpp"

#include <Eigen/Core>

#include "qkica_tools/svg.hpp"

namespace qkica::tools {

nlohmann::json version_info() {
    nlohmann::json v;
    v["qkica"] = QKICA_VERSION;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
#if defined(__clang__)
    v["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
    v["compiler"] = "gcc " __VERSION__;
#else
    v["compiler"] = "unknown";
#endif
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    return v;
}

nlohmann::json Manifest::to_json() const {
    nlohmann::json j;
    j["manifest_version"] = 1;
    j["command"] = command;
    j["config"] = config;
    j["config_hash"] = config_hash(config);
    j["seed"] = config.contains("seed") ? config.at("seed") : nlohmann::json();
    j["versions"] = version_info();
    j["outputs"] = outputs;
    j["summary"] = summary;
    return j;
}

void Manifest::write(const std::string& path) const { write_text_file(path, to_json().dump(2) + "\n"); }

} // namespace qkica::tools
