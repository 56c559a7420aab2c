#include "kgaug/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "kgaug/augment.hpp"

namespace kgaug {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "na"; }

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double sum = 0.0;
    for (const double x : v) sum += (x - mean) * (x - mean);
    return sum / static_cast<double>(v.size() - 1);
}

}  // namespace

Metrics metrics_from_confusion(const ConfusionCounts& c) {
    if (c.total() == 0) throw std::invalid_argument("metrics_from_confusion: empty evaluation set");
    Metrics m;
    m.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fn > 0) m.sen = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tn + c.fp > 0) m.spe = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    if (2 * c.tp + c.fp + c.fn > 0)
        m.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    return m;
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_auc: scores/labels size mismatch");
    std::size_t pos = 0, neg = 0;
    for (const int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
        (y == 1 ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("roc_auc: need at least one positive and one negative");

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});

    // Sweep thresholds over distinct scores; tied scores move together so the
    // trapezoid over the tie segment contributes the midrank 1/2 weight.
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    while (i < idx.size()) {
        const double s = scores[idx[i]];
        while (i < idx.size() && scores[idx[i]] == s) {
            (labels[idx[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        curve.points.push_back({fpr, tpr, s});
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = auc;
    return curve;
}

const char* variant_name(Variant v) {
    return v == Variant::baseline ? "baseline" : "augmented";
}

SweepCell evaluate_split(const FeatureMatrix& raw, const SplitPlan& split, Variant variant,
                         const SweepOptions& opts, const TrainConfig& train_config) {
    if (!raw.labeled()) throw std::invalid_argument("evaluate_split: dataset has no labels");

    SweepCell cell;
    cell.ratio = split.ratio;
    cell.variant = variant;
    cell.seed = split.seed;

    const auto stats =
        compute_minmax(raw, opts.normalize_train_only ? split.train_idx : std::vector<std::uint32_t>{});
    const FeatureMatrix norm = apply_minmax(raw, stats);

    std::vector<QuantizedFeature> quantized;
    if (variant == Variant::augmented) {
        std::vector<Bicluster> biclusters;
        if (opts.mine_train_only) {
            Matrix sub(split.train_idx.size(), norm.features());
            for (std::size_t a = 0; a < split.train_idx.size(); ++a)
                for (std::size_t j = 0; j < norm.features(); ++j)
                    sub(a, j) = norm.values(split.train_idx[a], j);
            biclusters = mine(sub, opts.mining);
            // Row indices refer to the submatrix; centroids and column sets
            // are all the augmentation needs downstream.
        } else {
            biclusters = mine(norm.values, opts.mining);
        }
        const auto features = distance_features(norm.values, biclusters);
        quantized = quantize_all(features, opts.n_bins);
        cell.n_augmented_features = quantized.size();
    }

    GraphOptions gopts = opts.graph;
    gopts.label_names = raw.label_names;
    const auto attribute_rows =
        opts.transductive ? std::vector<std::uint32_t>{} : split.train_idx;
    const auto triples =
        triples_from_table(raw, quantized, gopts, split.train_idx, attribute_rows);
    const KnowledgeGraph graph =
        fuse(triples.original, variant == Variant::augmented ? triples.augmented : NamedTripleSet{},
             gopts);

    TrainConfig cfg = train_config;
    cfg.seed = split.seed;
    const auto trained = train(graph, cfg);

    ConfusionCounts counts;
    std::vector<double> roc_scores;
    std::vector<int> roc_labels;
    for (const auto i : split.test_idx) {
        const std::string name = "patient:" + raw.sample_ids[i];
        const int truth = raw.labels[i];
        double score = 0.5;
        int predicted = 0;   // unseen patients default to benign at chance score
        const auto it = graph.entity_index.find(name);
        if (it != graph.entity_index.end()) {
            const auto pred = predict_diagnosis(trained.model, graph, it->second);
            predicted = pred.label;
            score = opts.renormalize_roc
                        ? pred.score_malignant / (pred.score_malignant + pred.score_benign)
                        : pred.score_malignant;
        } else {
            ++cell.n_unscored;
        }
        if (truth == 1) {
            (predicted == 1 ? counts.tp : counts.fn) += 1;
        } else {
            (predicted == 0 ? counts.tn : counts.fp) += 1;
        }
        roc_scores.push_back(score);
        roc_labels.push_back(truth);
        cell.test_ids.push_back(raw.sample_ids[i]);
    }

    cell.n_eval = split.test_idx.size();
    cell.metrics = metrics_from_confusion(counts);
    const bool both_classes =
        std::count(roc_labels.begin(), roc_labels.end(), 1) > 0 &&
        std::count(roc_labels.begin(), roc_labels.end(), 0) > 0;
    if (both_classes) {
        cell.roc = roc_auc(roc_scores, roc_labels);
        cell.auc = cell.roc.auc;
    }
    return cell;
}

SweepResult ratio_sweep(const FeatureMatrix& raw, const SweepOptions& opts,
                        const TrainConfig& train_config) {
    SweepResult result;
    for (const double ratio : opts.ratios) {
        if (!(ratio > 0.0 && ratio < 1.0))
            throw std::invalid_argument("ratio_sweep: ratios must lie in (0,1)");
        for (const auto seed : opts.seeds) {
            const auto split = split_by_ratio(raw.samples(), ratio, seed);
            if (opts.run_baseline)
                result.cells.push_back(
                    evaluate_split(raw, split, Variant::baseline, opts, train_config));
            if (opts.run_augmented)
                result.cells.push_back(
                    evaluate_split(raw, split, Variant::augmented, opts, train_config));
        }
    }
    return result;
}

std::vector<SweepSummaryRow> summarize(const SweepResult& result) {
    std::vector<SweepSummaryRow> rows;
    for (const auto& cell : result.cells) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const SweepSummaryRow& r) {
            return r.ratio == cell.ratio && r.variant == cell.variant;
        });
        if (it == rows.end()) {
            rows.push_back({cell.ratio, cell.variant, {}, {}, {}, {}, {}, 0});
            it = rows.end() - 1;
        }
        ++it->seeds;
    }

    for (auto& row : rows) {
        auto mean_of = [&](auto pick) -> std::optional<double> {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& cell : result.cells) {
                if (cell.ratio != row.ratio || cell.variant != row.variant) continue;
                if (const auto v = pick(cell)) {
                    sum += *v;
                    ++n;
                }
            }
            if (n == 0) return std::nullopt;
            return sum / static_cast<double>(n);
        };
        row.acc = mean_of([](const SweepCell& c) { return c.metrics.acc; });
        row.sen = mean_of([](const SweepCell& c) { return c.metrics.sen; });
        row.spe = mean_of([](const SweepCell& c) { return c.metrics.spe; });
        row.f1 = mean_of([](const SweepCell& c) { return c.metrics.f1; });
        row.auc = mean_of([](const SweepCell& c) { return c.auc; });
    }
    return rows;
}

void write_metrics_csv(std::ostream& out, const std::string& dataset, const SweepResult& result) {
    out << "dataset,ratio,variant,seed,acc,sen,spe,f1,auc\n";
    for (const auto& c : result.cells) {
        out << dataset << ',' << fmt(c.ratio) << ',' << variant_name(c.variant) << ',' << c.seed
            << ',' << fmt(c.metrics.acc) << ',' << fmt(c.metrics.sen) << ',' << fmt(c.metrics.spe)
            << ',' << fmt(c.metrics.f1) << ',' << fmt(c.auc) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::string& dataset,
                       const std::vector<SweepSummaryRow>& rows) {
    out << "dataset,ratio,variant,seeds,acc,sen,spe,f1,auc\n";
    for (const auto& r : rows) {
        out << dataset << ',' << fmt(r.ratio) << ',' << variant_name(r.variant) << ',' << r.seeds
            << ',' << fmt(r.acc) << ',' << fmt(r.sen) << ',' << fmt(r.spe) << ',' << fmt(r.f1)
            << ',' << fmt(r.auc) << '\n';
    }
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
    out << "fpr,tpr,threshold\n";
    for (const auto& p : curve.points) {
        out << fmt(p.fpr) << ',' << fmt(p.tpr) << ','
            << (std::isinf(p.threshold) ? "inf" : fmt(p.threshold)) << '\n';
    }
}

void SyntheticVarianceSpec::validate() const {
    if (signal_std <= 0.0)
        throw std::invalid_argument("SyntheticVarianceSpec: signal_std must be > 0");
    if (noise_std < 0.0)
        throw std::invalid_argument("SyntheticVarianceSpec: noise_std must be >= 0");
    if (samples < 2 || columns < 2 || trials < 1)
        throw std::invalid_argument("SyntheticVarianceSpec: degenerate dimensions");
}

VarianceReport variance_reduction_check(const SyntheticVarianceSpec& spec) {
    spec.validate();
    VarianceReport report;
    double raw_sum = 0.0, aug_sum = 0.0;

    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        Rng rng(spec.seed * 0x9E3779B97F4A7C15ULL + trial);
        Matrix z(spec.samples, spec.columns);
        for (std::size_t i = 0; i < spec.samples; ++i) {
            const double signal = rng.normal(spec.signal_mean, spec.signal_std);
            for (std::size_t j = 0; j < spec.columns; ++j)
                z(i, j) = signal + rng.normal(spec.noise_mean, spec.noise_std);
        }

        // Mine on the normalized copy, measure variances in raw units.
        Matrix norm = z;
        for (std::size_t j = 0; j < spec.columns; ++j) {
            double lo = z(0, j), hi = z(0, j);
            for (std::size_t i = 1; i < spec.samples; ++i) {
                lo = std::min(lo, z(i, j));
                hi = std::max(hi, z(i, j));
            }
            const double range = hi - lo;
            for (std::size_t i = 0; i < spec.samples; ++i)
                norm(i, j) = range == 0.0 ? 0.0 : (z(i, j) - lo) / range;
        }

        const auto biclusters = mine(norm, spec.mining);
        if (biclusters.empty()) {
            ++report.inconclusive;
            continue;
        }

        std::vector<double> centroid_entries;
        for (const auto& b : biclusters) {
            const auto t = centroid(z, b);
            centroid_entries.insert(centroid_entries.end(), t.begin(), t.end());
        }
        if (centroid_entries.size() < 2) {
            ++report.inconclusive;
            continue;
        }

        std::vector<double> raw_entries(z.data().begin(), z.data().end());
        const double raw_var = sample_variance(raw_entries);
        const double aug_var = sample_variance(centroid_entries);

        ++report.conclusive;
        raw_sum += raw_var;
        aug_sum += aug_var;
        if (aug_var < raw_var) ++report.strictly_smaller;
    }

    if (report.conclusive > 0) {
        report.pass_fraction =
            static_cast<double>(report.strictly_smaller) / static_cast<double>(report.conclusive);
        report.mean_raw_variance = raw_sum / static_cast<double>(report.conclusive);
        report.mean_augmented_variance = aug_sum / static_cast<double>(report.conclusive);
    }
    return report;
}

}  // namespace kgaug
