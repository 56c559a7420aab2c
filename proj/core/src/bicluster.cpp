#include "kgaug/bicluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace kgaug {

std::uint32_t MiningParams::resolved_min_rows(std::size_t n_samples) const {
    if (min_rows != 0) return min_rows;
    const auto frac = static_cast<std::uint32_t>(
        std::ceil(0.05 * static_cast<double>(n_samples)));
    return std::max<std::uint32_t>(4, frac);
}

void MiningParams::validate() const {
    if (epsilon <= 0.0) throw std::invalid_argument("MiningParams: epsilon must be > 0");
    if (delta <= 0.0) throw std::invalid_argument("MiningParams: delta must be > 0");
    if (min_rows == 1) throw std::invalid_argument("MiningParams: min_rows must be >= 2");
    if (min_cols < 2) throw std::invalid_argument("MiningParams: min_cols must be >= 2");
    if (max_biclusters < 1) throw std::invalid_argument("MiningParams: max_biclusters must be >= 1");
}

double msr(const Matrix& m, const std::vector<std::uint32_t>& rows,
           const std::vector<std::uint32_t>& cols) {
    if (rows.empty() || cols.empty())
        throw std::invalid_argument("msr: empty row or column set");

    const std::size_t nr = rows.size(), nc = cols.size();
    std::vector<double> row_mean(nr, 0.0), col_mean(nc, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
            const double v = m(rows[a], cols[b]);
            row_mean[a] += v;
            col_mean[b] += v;
            total += v;
        }
    }
    for (auto& v : row_mean) v /= static_cast<double>(nc);
    for (auto& v : col_mean) v /= static_cast<double>(nr);
    const double overall = total / static_cast<double>(nr * nc);

    double sum = 0.0;
    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
            const double res = m(rows[a], cols[b]) - row_mean[a] - col_mean[b] + overall;
            sum += res * res;
        }
    }
    return sum / static_cast<double>(nr * nc);
}

std::vector<Seed> seed_columns(const Matrix& m, double epsilon, std::uint32_t min_rows) {
    std::vector<Seed> seeds;
    const std::size_t nr = m.rows(), nc = m.cols();
    std::vector<std::pair<double, std::uint32_t>> order(nr);

    for (std::size_t j = 0; j < nc; ++j) {
        for (std::size_t i = 0; i < nr; ++i)
            order[i] = {m(i, j), static_cast<std::uint32_t>(i)};
        std::sort(order.begin(), order.end());   // by value, then row index

        // In one dimension, single-linkage clusters are exactly the maximal
        // runs of sorted values whose consecutive gaps stay <= epsilon.
        std::size_t start = 0;
        for (std::size_t i = 1; i <= nr; ++i) {
            if (i == nr || order[i].first - order[i - 1].first > epsilon) {
                if (i - start >= min_rows) {
                    Seed s;
                    s.column = static_cast<std::uint32_t>(j);
                    for (std::size_t a = start; a < i; ++a) s.rows.push_back(order[a].second);
                    std::sort(s.rows.begin(), s.rows.end());
                    seeds.push_back(std::move(s));
                }
                start = i;
            }
        }
    }
    return seeds;
}

namespace {

std::vector<std::uint32_t> without(const std::vector<std::uint32_t>& v, std::size_t pos) {
    std::vector<std::uint32_t> out;
    out.reserve(v.size() - 1);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (i != pos) out.push_back(v[i]);
    return out;
}

}  // namespace

std::optional<Bicluster> refine(const Matrix& m, const Seed& seed, const MiningParams& params,
                                std::vector<RefineStep>* trace) {
    std::vector<std::uint32_t> rows = seed.rows;
    std::vector<std::uint32_t> cols(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) cols[j] = static_cast<std::uint32_t>(j);

    if (rows.size() < 2 || cols.size() < params.min_cols) return std::nullopt;

    double score = msr(m, rows, cols);
    while (score > params.delta) {
        // Exact argmin over all single deletions. Candidate order fixes the
        // tie-break: rows first, lowest index first.
        bool found = false;
        bool best_is_row = false;
        std::size_t best_pos = 0;
        double best_score = 0.0;

        if (rows.size() > 2) {
            for (std::size_t a = 0; a < rows.size(); ++a) {
                const double s = msr(m, without(rows, a), cols);
                if (!found || s < best_score) {
                    found = true;
                    best_is_row = true;
                    best_pos = a;
                    best_score = s;
                }
            }
        }
        if (cols.size() > params.min_cols) {
            for (std::size_t b = 0; b < cols.size(); ++b) {
                const double s = msr(m, rows, without(cols, b));
                if (!found || s < best_score) {
                    found = true;
                    best_is_row = false;
                    best_pos = b;
                    best_score = s;
                }
            }
        }
        if (!found) return std::nullopt;   // size floor reached with msr > delta

        if (trace)
            trace->push_back({best_is_row,
                              best_is_row ? rows[best_pos] : cols[best_pos], best_score});
        if (best_is_row)
            rows = without(rows, best_pos);
        else
            cols = without(cols, best_pos);
        score = best_score;
    }

    Bicluster b;
    b.rows = std::move(rows);
    b.cols = std::move(cols);
    b.msr = score;
    b.centroid.assign(b.cols.size(), 0.0);
    for (std::size_t bi = 0; bi < b.cols.size(); ++bi) {
        double sum = 0.0;
        for (const auto r : b.rows) sum += m(r, b.cols[bi]);
        b.centroid[bi] = sum / static_cast<double>(b.rows.size());
    }
    return b;
}

std::vector<Bicluster> dedup(std::vector<Bicluster> biclusters) {
    using Key = std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>;
    std::map<Key, std::size_t> seen;
    std::vector<Bicluster> unique;
    for (auto& b : biclusters) {
        Key key{b.rows, b.cols};
        if (seen.emplace(std::move(key), unique.size()).second)
            unique.push_back(std::move(b));
    }
    std::stable_sort(unique.begin(), unique.end(), [](const Bicluster& a, const Bicluster& b) {
        if (a.area() != b.area()) return a.area() > b.area();
        if (a.rows != b.rows) return a.rows < b.rows;
        return a.cols < b.cols;
    });
    return unique;
}

std::vector<Bicluster> mine(const Matrix& m, const MiningParams& params) {
    params.validate();
    const auto min_rows = params.resolved_min_rows(m.rows());

    std::vector<Bicluster> found;
    for (const auto& seed : seed_columns(m, params.epsilon, min_rows)) {
        if (auto b = refine(m, seed, params)) found.push_back(std::move(*b));
    }
    auto unique = dedup(std::move(found));
    if (unique.size() > params.max_biclusters) unique.resize(params.max_biclusters);
    return unique;
}

std::string biclusters_to_json(const std::vector<Bicluster>& biclusters) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : biclusters) {
        arr.push_back({{"rows", b.rows}, {"cols", b.cols}, {"msr", b.msr},
                       {"centroid", b.centroid}});
    }
    return arr.dump(2) + "\n";
}

std::vector<Bicluster> biclusters_from_json(const std::string& text) {
    const auto arr = nlohmann::json::parse(text);
    std::vector<Bicluster> out;
    for (const auto& item : arr) {
        Bicluster b;
        b.rows = item.at("rows").get<std::vector<std::uint32_t>>();
        b.cols = item.at("cols").get<std::vector<std::uint32_t>>();
        b.msr = item.at("msr").get<double>();
        b.centroid = item.at("centroid").get<std::vector<double>>();
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace kgaug
