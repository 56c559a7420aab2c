#pragma once

#include <string>
#include <vector>

#include "kgaug/config.hpp"

namespace kgaug {

// Staged pipeline runners behind the command line tool. Every stage is a
// deterministic function of the config: rerunning a stage with the same
// config yields byte-identical artifacts. Each stage writes its outputs
// plus a `<stage>_manifest.json` naming the config hash, seeds, and files;
// on failure the stage's partial outputs are removed before the error
// propagates.
struct StageReport {
    std::string stage;
    std::vector<std::string> outputs;   // paths relative to out_dir
};

FeatureMatrix load_dataset(const RunConfig& config);

StageReport run_mine(const RunConfig& config, const std::string& out_dir);
StageReport run_augment(const RunConfig& config, const std::string& out_dir);
StageReport run_fuse(const RunConfig& config, const std::string& out_dir);

// Trains on the full graph (all diagnosis triples) for each selected
// variant; consumes the fuse stage's triple files when they are present in
// out_dir, otherwise rebuilds them from the config.
StageReport run_train(const RunConfig& config, const std::string& out_dir);

// Single evaluation at the first configured ratio and seed.
StageReport run_eval(const RunConfig& config, const std::string& out_dir);

// Full ratios x variants x seeds grid with per-cell ROC dumps and a
// mean-over-seeds summary.
StageReport run_sweep(const RunConfig& config, const std::string& out_dir);

// Built-in property suites: the variance-reduction experiment plus oracle
// spot checks (greedy deletion argmin, trapezoidal AUC vs pairwise counts).
// Returns false if any suite fails.
bool run_check(const RunConfig& config, const std::string& out_dir, StageReport& report);

}  // namespace kgaug
