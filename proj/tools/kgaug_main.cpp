#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kgaug/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string variant;
    std::string ratios;
    std::int64_t seed = -1;
    bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
    cmd->add_option("--variant", flags.variant, "baseline | augmented | both")
        ->check(CLI::IsMember({"baseline", "augmented", "both"}));
    cmd->add_option("--ratios", flags.ratios, "comma separated training ratios");
    cmd->add_option("--seed", flags.seed, "seed (overrides config)");
}

kgaug::RunConfig make_config(const CommonFlags& flags) {
    auto config = kgaug::load_run_config(flags.config_path);

    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
    if (const char* env = std::getenv("KGAUG_OUT"); env && flags.out_dir.empty())
        config.output_dir = env;

    if (flags.seed >= 0) {
        config.train.seed = static_cast<std::uint64_t>(flags.seed);
        config.sweep.seeds = {static_cast<std::uint64_t>(flags.seed)};
    }
    if (!flags.variant.empty()) {
        config.sweep.run_baseline = flags.variant != "augmented";
        config.sweep.run_augmented = flags.variant != "baseline";
    }
    if (!flags.ratios.empty()) {
        std::vector<double> ratios;
        std::string rest = flags.ratios;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string tok = rest.substr(0, comma);
            rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
            try {
                ratios.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw std::runtime_error("--ratios: '" + tok + "' is not a number");
            }
        }
        if (ratios.empty()) throw std::runtime_error("--ratios: empty list");
        config.sweep.ratios = ratios;
    }
    config.validate();
    return config;
}

void report(const kgaug::StageReport& r, const std::string& out_dir) {
    std::cout << r.stage << ": wrote " << r.outputs.size() << " file(s) under " << out_dir << '\n';
    for (const auto& f : r.outputs) std::cout << "  " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bicluster-augmented knowledge graph pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* mine = app.add_subcommand("mine", "mine biclusters, emit biclusters.json");
    auto* augment = app.add_subcommand("augment", "emit augmented.csv and bins.json");
    auto* fuse = app.add_subcommand("fuse", "emit triple files for original, augmented, fused");
    auto* train = app.add_subcommand("train", "train on the full graph, emit checkpoint + loss history");
    auto* eval = app.add_subcommand("eval", "single split evaluation, emit metrics + ROC");
    auto* sweep = app.add_subcommand("sweep", "full ratio x variant x seed grid");
    auto* check = app.add_subcommand("check", "run the built-in property suites");
    for (auto* cmd : {mine, augment, fuse, train, eval, sweep, check}) add_common(cmd, flags);

    CLI11_PARSE(app, argc, argv);

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        const auto config = make_config(flags);
        const std::string out = config.output_dir;
        if (stage == "mine") {
            report(kgaug::run_mine(config, out), out);
        } else if (stage == "augment") {
            report(kgaug::run_augment(config, out), out);
        } else if (stage == "fuse") {
            report(kgaug::run_fuse(config, out), out);
        } else if (stage == "train") {
            report(kgaug::run_train(config, out), out);
        } else if (stage == "eval") {
            report(kgaug::run_eval(config, out), out);
        } else if (stage == "sweep") {
            report(kgaug::run_sweep(config, out), out);
        } else if (stage == "check") {
            kgaug::StageReport r;
            const bool ok = kgaug::run_check(config, out, r);
            report(r, out);
            std::cout << "check: " << (ok ? "PASS" : "FAIL") << '\n';
            if (!ok) return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "kgaug " << stage << ": error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
