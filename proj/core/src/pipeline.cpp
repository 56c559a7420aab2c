#include "kgaug/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kgaug/augment.hpp"

namespace fs = std::filesystem;

namespace kgaug {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Tracks files written by a stage; everything not committed is unlinked when
// the stage unwinds, so failed runs leave no partial artifacts behind.
class StageGuard {
public:
    StageGuard(std::string stage, std::string out_dir)
        : stage_(std::move(stage)), out_dir_(std::move(out_dir)) {
        fs::create_directories(out_dir_);
    }

    ~StageGuard() {
        if (committed_) return;
        for (const auto& rel : written_) {
            std::error_code ec;
            fs::remove(fs::path(out_dir_) / rel, ec);
        }
    }

    void write_text(const std::string& rel_path, const std::string& content) {
        const fs::path full = fs::path(out_dir_) / rel_path;
        fs::create_directories(full.parent_path());
        written_.push_back(rel_path);
        std::ofstream out(full, std::ios::binary);
        if (!out) throw std::runtime_error(stage_ + ": cannot write '" + full.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error(stage_ + ": failed writing '" + full.string() + "'");
    }

    std::string track(const std::string& rel_path) {
        written_.push_back(rel_path);
        const fs::path full = fs::path(out_dir_) / rel_path;
        fs::create_directories(full.parent_path());
        return full.string();
    }

    StageReport commit(const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
        nlohmann::json manifest = {
            {"stage", stage_},
            {"config_hash", hex64(config_hash(config))},
            {"seeds", seeds},
            {"outputs", written_},
        };
        write_text(stage_ + "_manifest.json", manifest.dump(2) + "\n");
        committed_ = true;
        return {stage_, written_};
    }

private:
    std::string stage_;
    std::string out_dir_;
    std::vector<std::string> written_;
    bool committed_ = false;
};

struct Prepared {
    FeatureMatrix raw;
    FeatureMatrix normalized;
    std::vector<Bicluster> biclusters;
    std::vector<AugmentedFeature> features;
    std::vector<QuantizedFeature> quantized;
};

Prepared prepare(const RunConfig& config, bool with_augmented) {
    Prepared p;
    p.raw = load_dataset(config);
    p.normalized = normalize_minmax(p.raw);
    if (with_augmented) {
        p.biclusters = mine(p.normalized.values, config.mining);
        p.features = distance_features(p.normalized.values, p.biclusters);
        p.quantized = quantize_all(p.features, config.n_bins);
    }
    return p;
}

std::string augmented_csv(const Prepared& p) {
    std::ostringstream out;
    out << "sample_id";
    for (const auto& f : p.features) out << ",AUG" << f.index;
    out << '\n';
    for (std::size_t i = 0; i < p.raw.samples(); ++i) {
        out << p.raw.sample_ids[i];
        for (const auto& f : p.features) out << ',' << fmt(f.values[i]);
        out << '\n';
    }
    return out.str();
}

std::string bins_json(const Prepared& p) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& q : p.quantized) edges.push_back(q.edges);
    const nlohmann::json doc = {
        {"n_bins", p.quantized.empty() ? 0 : p.quantized.front().n_bins},
        {"edges", edges},
    };
    return doc.dump(2) + "\n";
}

std::string triples_text(const NamedTripleSet& triples) {
    std::ostringstream out;
    save_triples(out, triples);
    return out.str();
}

std::string loss_csv(const std::vector<double>& history) {
    std::ostringstream out;
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i + 1 << ',' << fmt(history[i]) << '\n';
    return out.str();
}

GraphOptions graph_options(const RunConfig& config) {
    GraphOptions g = config.graph;
    g.label_names = config.schema.label_names;
    return g;
}

}  // namespace

FeatureMatrix load_dataset(const RunConfig& config) {
    if (config.dataset_path.empty())
        throw std::runtime_error("config names no dataset.path");
    return load_table(config.dataset_path, config.schema);
}

StageReport run_mine(const RunConfig& config, const std::string& out_dir) {
    StageGuard guard("mine", out_dir);
    const auto p = prepare(config, true);
    guard.write_text("biclusters.json", biclusters_to_json(p.biclusters));
    return guard.commit(config, {});
}

StageReport run_augment(const RunConfig& config, const std::string& out_dir) {
    StageGuard guard("augment", out_dir);
    const auto p = prepare(config, true);
    guard.write_text("augmented.csv", augmented_csv(p));
    guard.write_text("bins.json", bins_json(p));
    return guard.commit(config, {});
}

StageReport run_fuse(const RunConfig& config, const std::string& out_dir) {
    StageGuard guard("fuse", out_dir);
    const auto p = prepare(config, true);
    const auto triples = triples_from_table(p.raw, p.quantized, graph_options(config));
    const auto fused = fuse(triples.original, triples.augmented, graph_options(config));
    guard.write_text("triples_original.tsv", triples_text(triples.original));
    guard.write_text("triples_augmented.tsv", triples_text(triples.augmented));
    guard.write_text("triples_fused.tsv", triples_text(named_triples(fused)));
    return guard.commit(config, {});
}

StageReport run_train(const RunConfig& config, const std::string& out_dir) {
    StageGuard guard("train", out_dir);

    // Consume the fuse stage's artifacts when present.
    NamedTripleSet original, augmented;
    const fs::path orig_path = fs::path(out_dir) / "triples_original.tsv";
    const fs::path aug_path = fs::path(out_dir) / "triples_augmented.tsv";
    if (fs::exists(orig_path)) {
        original = load_triples(orig_path.string());
        if (fs::exists(aug_path)) augmented = load_triples(aug_path.string());
    } else {
        const auto p = prepare(config, config.sweep.run_augmented);
        const auto triples = triples_from_table(p.raw, p.quantized, graph_options(config));
        original = triples.original;
        augmented = triples.augmented;
    }

    std::vector<Variant> variants;
    if (config.sweep.run_baseline) variants.push_back(Variant::baseline);
    if (config.sweep.run_augmented) variants.push_back(Variant::augmented);

    for (const Variant v : variants) {
        const auto graph = fuse(
            original, v == Variant::augmented ? augmented : NamedTripleSet{}, graph_options(config));
        const auto result = train(graph, config.train);
        const std::string name = variant_name(v);
        save_checkpoint(guard.track("checkpoint_" + name + ".bin"), result.model, config.train,
                        graph);
        guard.write_text("loss_history_" + name + ".csv", loss_csv(result.loss_history));
    }
    return guard.commit(config, {config.train.seed});
}

namespace {

StageReport run_grid(const RunConfig& config, const std::string& out_dir, bool full_grid,
                     const char* stage_name) {
    StageGuard guard(stage_name, out_dir);
    const auto raw = load_dataset(config);

    SweepOptions opts = config.sweep;
    if (!full_grid) {
        opts.ratios = {config.sweep.ratios.front()};
        opts.seeds = {config.sweep.seeds.front()};
    }

    const auto result = ratio_sweep(raw, opts, config.train);

    std::ostringstream metrics;
    write_metrics_csv(metrics, config.dataset_name, result);
    guard.write_text("metrics.csv", metrics.str());

    std::ostringstream summary;
    write_summary_csv(summary, config.dataset_name, summarize(result));
    guard.write_text("summary.csv", summary.str());

    for (const auto& cell : result.cells) {
        if (!cell.auc) continue;
        std::ostringstream roc;
        write_roc_csv(roc, cell.roc);
        std::ostringstream name;
        name << "roc/roc_" << fmt(cell.ratio) << '_' << variant_name(cell.variant) << "_s"
             << cell.seed << ".csv";
        guard.write_text(name.str(), roc.str());
    }
    return guard.commit(config, opts.seeds);
}

}  // namespace

StageReport run_eval(const RunConfig& config, const std::string& out_dir) {
    return run_grid(config, out_dir, false, "eval");
}

StageReport run_sweep(const RunConfig& config, const std::string& out_dir) {
    return run_grid(config, out_dir, true, "sweep");
}

bool run_check(const RunConfig& config, const std::string& out_dir, StageReport& report) {
    StageGuard guard("check", out_dir);
    nlohmann::json doc;
    bool ok = true;

    {
        SyntheticVarianceSpec spec;
        const auto var = variance_reduction_check(spec);
        const bool pass = var.conclusive > 0 && var.pass_fraction >= 0.95;
        ok = ok && pass;
        doc["variance_reduction"] = {
            {"conclusive", var.conclusive},
            {"inconclusive", var.inconclusive},
            {"pass_fraction", var.pass_fraction},
            {"mean_raw_variance", var.mean_raw_variance},
            {"mean_augmented_variance", var.mean_augmented_variance},
            {"pass", pass},
        };
    }

    {
        // Greedy deletions must match the exhaustive argmin on small random
        // matrices.
        Rng rng(config.train.seed);
        std::size_t checked = 0, mismatches = 0;
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t nr = 3 + rng.below(4), nc = 3 + rng.below(3);
            Matrix m(nr, nc);
            for (auto& v : m.data()) v = rng.uniform();
            MiningParams params;
            params.min_rows = 2;
            params.delta = 1e-6;   // force deletions
            for (const auto& seed : seed_columns(m, 0.5, 2)) {
                std::vector<RefineStep> trace;
                refine(m, seed, params, &trace);
                std::vector<std::uint32_t> rows = seed.rows, cols;
                for (std::uint32_t j = 0; j < nc; ++j) cols.push_back(j);
                for (const auto& step : trace) {
                    double best = std::numeric_limits<double>::infinity();
                    bool best_is_row = false;
                    std::uint32_t best_index = 0;
                    auto consider = [&](bool is_row, std::uint32_t index, double s) {
                        if (s < best) {
                            best = s;
                            best_is_row = is_row;
                            best_index = index;
                        }
                    };
                    if (rows.size() > 2) {
                        for (std::size_t a = 0; a < rows.size(); ++a) {
                            auto r2 = rows;
                            r2.erase(r2.begin() + static_cast<std::ptrdiff_t>(a));
                            consider(true, rows[a], msr(m, r2, cols));
                        }
                    }
                    if (cols.size() > params.min_cols) {
                        for (std::size_t b = 0; b < cols.size(); ++b) {
                            auto c2 = cols;
                            c2.erase(c2.begin() + static_cast<std::ptrdiff_t>(b));
                            consider(false, cols[b], msr(m, rows, c2));
                        }
                    }
                    ++checked;
                    if (step.deleted_row != best_is_row || step.index != best_index ||
                        std::abs(step.msr_after - best) > 1e-9)
                        ++mismatches;
                    auto& target = step.deleted_row ? rows : cols;
                    target.erase(std::find(target.begin(), target.end(), step.index));
                }
            }
        }
        const bool pass = mismatches == 0 && checked > 0;
        ok = ok && pass;
        doc["greedy_argmin"] = {{"steps_checked", checked}, {"mismatches", mismatches},
                                {"pass", pass}};
    }

    {
        // Trapezoidal AUC vs the O(n^2) pairwise statistic, ties included.
        Rng rng(config.train.seed + 1);
        std::size_t checked = 0, mismatches = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = 2 + rng.below(18);
            std::vector<double> scores(n);
            std::vector<int> labels(n);
            for (auto& s : scores) s = static_cast<double>(rng.below(6)) / 5.0;
            for (auto& y : labels) y = rng.below(2) ? 1 : 0;
            if (std::count(labels.begin(), labels.end(), 1) == 0 ||
                std::count(labels.begin(), labels.end(), 0) == 0)
                continue;
            const auto curve = roc_auc(scores, labels);
            double wins = 0.0;
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] != 1) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (labels[j] != 0) continue;
                    ++pairs;
                    if (scores[i] > scores[j]) wins += 1.0;
                    else if (scores[i] == scores[j]) wins += 0.5;
                }
            }
            ++checked;
            if (std::abs(curve.auc - wins / static_cast<double>(pairs)) > 1e-12) ++mismatches;
        }
        const bool pass = mismatches == 0 && checked > 0;
        ok = ok && pass;
        doc["auc_pairwise"] = {{"sets_checked", checked}, {"mismatches", mismatches},
                               {"pass", pass}};
    }

    doc["pass"] = ok;
    guard.write_text("check_report.json", doc.dump(2) + "\n");
    report = guard.commit(config, {config.train.seed});
    return ok;
}

}  // namespace kgaug
