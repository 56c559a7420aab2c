#pragma once

#include <cstdint>
#include <string>

#include "kgaug/bicluster.hpp"
#include "kgaug/dataset.hpp"
#include "kgaug/eval.hpp"
#include "kgaug/kgraph.hpp"
#include "kgaug/tucker.hpp"

namespace kgaug {

// Full run description, loaded from a JSON file. Unknown keys are rejected
// at every level; every key is optional except dataset.path for commands
// that read data. Training defaults are the reference hyperparameters.
struct RunConfig {
    std::string dataset_path;
    std::string dataset_name;       // defaults to the file stem
    TableSchema schema;
    MiningParams mining;
    std::uint32_t n_bins = 5;
    GraphOptions graph;
    TrainConfig train;
    SweepOptions sweep;             // ratios/seeds/variants + pipeline flags
    std::string output_dir = "out";

    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

// Canonical serialization (sorted keys, full defaults) used for hashing and
// manifests. Two configs hash equal iff every effective setting matches.
std::string run_config_to_json(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

std::string hex64(std::uint64_t value);

}  // namespace kgaug
