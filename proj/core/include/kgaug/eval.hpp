#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kgaug/bicluster.hpp"
#include "kgaug/dataset.hpp"
#include "kgaug/kgraph.hpp"
#include "kgaug/tucker.hpp"

namespace kgaug {

// Positive = malignant throughout.
struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Metrics with undefined denominators flagged (nullopt), never zero-filled.
struct Metrics {
    std::optional<double> acc, sen, spe, f1;
};

Metrics metrics_from_confusion(const ConfusionCounts& c);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;   // predict positive when score >= threshold
};

struct RocCurve {
    std::vector<RocPoint> points;   // anchored at (0,0) and (1,1), monotone
    double auc = 0.0;               // trapezoidal; equals the midrank Mann-Whitney statistic
};

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

enum class Variant { baseline, augmented };

const char* variant_name(Variant v);

struct SweepOptions {
    std::vector<double> ratios = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    bool run_baseline = true;
    bool run_augmented = true;
    MiningParams mining;
    std::uint32_t n_bins = 5;
    GraphOptions graph;
    bool transductive = true;          // test patients keep their attribute triples
    bool mine_train_only = false;      // default mines the full matrix
    bool normalize_train_only = false;
    bool renormalize_roc = false;      // score = mal/(mal+ben) instead of raw sigmoid
};

struct SweepCell {
    double ratio = 0.0;
    Variant variant = Variant::baseline;
    std::uint64_t seed = 0;
    Metrics metrics;
    std::optional<double> auc;         // absent when the test slice is single-class
    RocCurve roc;                      // empty when auc is absent
    std::size_t n_eval = 0;            // evaluated test patients
    std::size_t n_unscored = 0;        // test patients absent from the vocabulary (strict mode)
    std::size_t n_augmented_features = 0;
    std::vector<std::string> test_ids;
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

struct SweepSummaryRow {
    double ratio = 0.0;
    Variant variant = Variant::baseline;
    std::optional<double> acc, sen, spe, f1, auc;   // mean over seeds where defined
    std::size_t seeds = 0;
};

// Evaluate one (split, variant): build the graph, train, score held-out
// diagnosis triples. Baseline and augmented share the split for a seed.
SweepCell evaluate_split(const FeatureMatrix& raw, const SplitPlan& split, Variant variant,
                         const SweepOptions& opts, const TrainConfig& train_config);

// Full grid over ratios x variants x seeds. Paired: both variants of a
// (ratio, seed) cell evaluate the identical held-out patients.
SweepResult ratio_sweep(const FeatureMatrix& raw, const SweepOptions& opts,
                        const TrainConfig& train_config);

std::vector<SweepSummaryRow> summarize(const SweepResult& result);

// CSV: dataset,ratio,variant,seed,acc,sen,spe,f1,auc with "na" for flagged
// values. Deterministic formatting.
void write_metrics_csv(std::ostream& out, const std::string& dataset, const SweepResult& result);
void write_summary_csv(std::ostream& out, const std::string& dataset,
                       const std::vector<SweepSummaryRow>& rows);
void write_roc_csv(std::ostream& out, const RocCurve& curve);

// Synthetic experiment for the variance-reduction property: rows carry a
// shared Gaussian signal, cells add independent Gaussian noise; bicluster
// column means should have smaller sample variance than the raw entries.
struct SyntheticVarianceSpec {
    double signal_mean = 0.5;
    double signal_std = 0.1;
    double noise_mean = 0.0;
    double noise_std = 0.3;    // 0 allowed: noise-free limit
    std::size_t samples = 200;
    std::size_t columns = 8;
    std::size_t trials = 100;
    std::uint64_t seed = 7;
    MiningParams mining;

    void validate() const;
};

struct VarianceReport {
    std::size_t conclusive = 0;
    std::size_t inconclusive = 0;      // trials where mining found nothing
    std::size_t strictly_smaller = 0;
    double pass_fraction = 0.0;        // strictly_smaller / conclusive
    double mean_raw_variance = 0.0;
    double mean_augmented_variance = 0.0;
};

VarianceReport variance_reduction_check(const SyntheticVarianceSpec& spec);

}  // namespace kgaug
