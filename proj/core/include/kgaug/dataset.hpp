#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgaug/matrix.hpp"

namespace kgaug {

// Column roles for load_table. Feature columns listed in categorical_levels
// are parsed as categorical codes and encoded as integer levels in the
// declared order; everything else must parse as a real number.
struct TableSchema {
    std::string id_column;
    std::vector<std::string> feature_columns;
    std::string label_column;                                    // empty: unlabeled table
    std::map<std::string, std::vector<std::string>> categorical_levels;
    std::map<std::string, int> label_map;                        // raw label cell -> 0 or 1
    std::array<std::string, 2> label_names = {"benign", "malignant"};
};

// Samples x features table. `values` holds the numeric encoding (raw level
// codes after load_table, [0,1] after normalization). The label column is
// kept apart from the feature columns. `cell_text` keeps the original cell
// strings for entity naming; empty for synthetic matrices.
struct FeatureMatrix {
    std::vector<std::string> sample_ids;
    std::vector<std::string> feature_names;
    Matrix values;
    std::vector<int> labels;                   // empty if unlabeled, else one 0/1 per sample
    std::array<std::string, 2> label_names = {"benign", "malignant"};
    std::vector<std::string> cell_text;        // row-major m*n, may be empty

    std::size_t samples() const { return values.rows(); }
    std::size_t features() const { return values.cols(); }
    bool labeled() const { return !labels.empty(); }
    const std::string& cell_repr(std::size_t i, std::size_t j) const {
        return cell_text[i * values.cols() + j];
    }
};

struct MinMaxStats {
    std::vector<double> min;
    std::vector<double> max;
};

struct SplitPlan {
    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> train_idx;   // sorted
    std::vector<std::uint32_t> test_idx;    // sorted
};

FeatureMatrix load_table(const std::string& path, const TableSchema& schema);
FeatureMatrix load_table_csv(std::istream& in, const std::string& origin, const TableSchema& schema);

// Per-column min/max over the given rows (all rows if `rows` is empty).
MinMaxStats compute_minmax(const FeatureMatrix& m, const std::vector<std::uint32_t>& rows = {});

// (x - min) / (max - min) per column; constant columns map to all-zero.
FeatureMatrix apply_minmax(const FeatureMatrix& m, const MinMaxStats& stats);
FeatureMatrix normalize_minmax(const FeatureMatrix& m);

// Deterministic shuffled split; |train| = round(ratio * m).
SplitPlan split_by_ratio(std::size_t n_samples, double ratio, std::uint64_t seed);

}  // namespace kgaug
