#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkica/circuit.hpp"
#include "qkica/contrast.hpp"
#include "qkica/optimize.hpp"
#include "qkica/qemu.hpp"
#include "qkica/sources.hpp"

namespace qkica::tools {

struct NystromSettings {
    Index n_mc = 10000;
    Index top = 3;
    double F_ij = 1.0;
    Index trials = 200;
    double delta = 3.0;
    bool coverage = false;
};

struct ExperimentConfig {
    std::optional<std::uint64_t> seed;
    SourceSpec sources;
    // When set, samples are read from this CSV instead of generated.
    std::string input_csv;
    Orientation orientation = Orientation::Rows;
    std::optional<Matrix> mixing_matrix;
    // Angles for the elementary generators, used when no matrix is given.
    std::vector<double> mixing_deltas;
    ContrastOptions contrast;
    NoiseSpec noise;
    OptimizeOptions optimizer;
    std::string phase = "coarse";
    GridAxis grid{-0.7853981633974483, 0.7853981633974483, 21};
    std::optional<GridAxis> grid2;
    NystromSettings nystrom;
    CircuitLayout circuit{2, 8, true};
    std::string out = "qkica-out";
    bool dump_gram = false;
    bool whiten = true;
    std::string suite = "all";

    ExperimentConfig();

    nlohmann::json to_json() const;
    // Unknown keys are rejected. A run manifest is accepted in place of a
    // config and its embedded config is used.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);

    std::uint64_t require_seed() const;
    // Mixing matrix for m variables: explicit, from deltas, or identity.
    Matrix mixing(Index m) const;
};

// FNV-1a over the canonical JSON text.
std::string config_hash(const nlohmann::json& config);

} // namespace qkica::tools
