#include "kgaug/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "kgaug/rng.hpp"

namespace kgaug {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back("");
    return fields;
}

[[noreturn]] void parse_error(const std::string& origin, std::size_t row,
                              const std::string& column, const std::string& what) {
    throw std::runtime_error(origin + ": row " + std::to_string(row) + ", column '" +
                             column + "': " + what);
}

}  // namespace

FeatureMatrix load_table_csv(std::istream& in, const std::string& origin,
                             const TableSchema& schema) {
    if (schema.feature_columns.empty())
        throw std::runtime_error(origin + ": schema declares no feature columns");

    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error(origin + ": empty file, expected a header row");
    const auto header = split_csv_line(header_line);

    std::unordered_map<std::string, std::size_t> col_pos;
    for (std::size_t i = 0; i < header.size(); ++i) col_pos[header[i]] = i;

    auto require = [&](const std::string& name) {
        const auto it = col_pos.find(name);
        if (it == col_pos.end())
            throw std::runtime_error(origin + ": missing column '" + name + "' in header");
        return it->second;
    };

    const std::size_t id_pos = require(schema.id_column);
    std::vector<std::size_t> feat_pos;
    for (const auto& f : schema.feature_columns) feat_pos.push_back(require(f));
    const bool labeled = !schema.label_column.empty();
    const std::size_t label_pos = labeled ? require(schema.label_column) : 0;

    // Per-feature level lookup for the declared categorical columns.
    std::vector<const std::vector<std::string>*> levels(schema.feature_columns.size(), nullptr);
    for (std::size_t j = 0; j < schema.feature_columns.size(); ++j) {
        const auto it = schema.categorical_levels.find(schema.feature_columns[j]);
        if (it != schema.categorical_levels.end()) levels[j] = &it->second;
    }

    FeatureMatrix out;
    out.feature_names = schema.feature_columns;
    out.label_names = schema.label_names;

    std::vector<std::vector<double>> value_rows;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error(origin + ": row " + std::to_string(row_no) + " has " +
                                     std::to_string(fields.size()) + " fields, header has " +
                                     std::to_string(header.size()));

        const std::string& id = fields[id_pos];
        if (!seen_ids.insert(id).second)
            parse_error(origin, row_no, schema.id_column, "duplicate sample ID '" + id + "'");
        out.sample_ids.push_back(id);

        std::vector<double> row(feat_pos.size());
        for (std::size_t j = 0; j < feat_pos.size(); ++j) {
            const std::string& cell = fields[feat_pos[j]];
            if (cell.empty())
                parse_error(origin, row_no, schema.feature_columns[j], "missing value");
            if (levels[j]) {
                const auto& lv = *levels[j];
                const auto it = std::find(lv.begin(), lv.end(), cell);
                if (it == lv.end())
                    parse_error(origin, row_no, schema.feature_columns[j],
                                "unknown categorical code '" + cell + "'");
                row[j] = static_cast<double>(it - lv.begin());
            } else {
                double v = 0.0;
                const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                    parse_error(origin, row_no, schema.feature_columns[j],
                                "cell '" + cell + "' is not a real number");
                row[j] = v;
            }
            out.cell_text.push_back(cell);
        }
        value_rows.push_back(std::move(row));

        if (labeled) {
            const std::string& cell = fields[label_pos];
            const auto it = schema.label_map.find(cell);
            if (it == schema.label_map.end())
                parse_error(origin, row_no, schema.label_column,
                            "label '" + cell + "' missing from label_map");
            if (it->second != 0 && it->second != 1)
                parse_error(origin, row_no, schema.label_column, "label_map values must be 0 or 1");
            out.labels.push_back(it->second);
        }
    }

    if (value_rows.empty())
        throw std::runtime_error(origin + ": no data rows");
    out.values = Matrix::from_rows(value_rows);
    return out;
}

FeatureMatrix load_table(const std::string& path, const TableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
    return load_table_csv(in, path, schema);
}

MinMaxStats compute_minmax(const FeatureMatrix& m, const std::vector<std::uint32_t>& rows) {
    if (m.values.empty()) throw std::runtime_error("compute_minmax: empty matrix");
    const std::size_t n = m.features();
    MinMaxStats stats;
    stats.min.assign(n, std::numeric_limits<double>::infinity());
    stats.max.assign(n, -std::numeric_limits<double>::infinity());
    auto visit = [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            stats.min[j] = std::min(stats.min[j], m.values(i, j));
            stats.max[j] = std::max(stats.max[j], m.values(i, j));
        }
    };
    if (rows.empty()) {
        for (std::size_t i = 0; i < m.samples(); ++i) visit(i);
    } else {
        for (const auto i : rows) visit(i);
    }
    return stats;
}

FeatureMatrix apply_minmax(const FeatureMatrix& m, const MinMaxStats& stats) {
    FeatureMatrix out = m;
    for (std::size_t j = 0; j < m.features(); ++j) {
        const double lo = stats.min[j];
        const double range = stats.max[j] - lo;
        for (std::size_t i = 0; i < m.samples(); ++i) {
            // Constant column: no information either way, define as 0.
            double v = range == 0.0 ? 0.0 : (m.values(i, j) - lo) / range;
            out.values(i, j) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

FeatureMatrix normalize_minmax(const FeatureMatrix& m) {
    return apply_minmax(m, compute_minmax(m));
}

SplitPlan split_by_ratio(std::size_t n_samples, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split_by_ratio: ratio must be in (0,1)");
    if (n_samples < 2)
        throw std::invalid_argument("split_by_ratio: need at least 2 samples");

    const auto n_train =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_samples)));
    if (n_train == 0 || n_train == n_samples)
        throw std::invalid_argument("split_by_ratio: split would leave one side empty");

    std::vector<std::uint32_t> idx(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) idx[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    rng.shuffle(idx);

    SplitPlan plan;
    plan.ratio = ratio;
    plan.seed = seed;
    plan.train_idx.assign(idx.begin(), idx.begin() + n_train);
    plan.test_idx.assign(idx.begin() + n_train, idx.end());
    std::sort(plan.train_idx.begin(), plan.train_idx.end());
    std::sort(plan.test_idx.begin(), plan.test_idx.end());
    return plan;
}

}  // namespace kgaug
