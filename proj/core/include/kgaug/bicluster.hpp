#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kgaug/matrix.hpp"

namespace kgaug {

// One-dimensional cluster: rows whose values in a single column were merged
// by single-linkage agglomeration. Starting point for bicluster refinement.
struct Seed {
    std::uint32_t column = 0;
    std::vector<std::uint32_t> rows;   // sorted
};

struct Bicluster {
    std::vector<std::uint32_t> rows;   // sorted
    std::vector<std::uint32_t> cols;   // sorted
    double msr = 0.0;
    std::vector<double> centroid;      // column means over rows, aligned with cols

    std::size_t area() const { return rows.size() * cols.size(); }
};

struct MiningParams {
    double epsilon = 0.05;             // seed merge gap, normalized units
    std::uint32_t min_rows = 0;        // 0: auto, max(4, ceil(0.05 * m))
    double delta = 0.02;               // MSR acceptance threshold
    std::uint32_t min_cols = 2;
    std::uint32_t max_biclusters = 32;

    std::uint32_t resolved_min_rows(std::size_t n_samples) const;
    void validate() const;
};

// Mean squared residue of the submatrix rows x cols:
//   (1/(|R||C|)) * sum (x_ij - x_iC - x_Rj + x_RC)^2
// with x_iC the row mean over C, x_Rj the column mean over R, x_RC the
// overall mean. Zero for constant and for additive (a_i + b_j) submatrices.
double msr(const Matrix& m, const std::vector<std::uint32_t>& rows,
           const std::vector<std::uint32_t>& cols);

// Per column, single-linkage agglomeration of the column values: sorted by
// (value, row), merged while the gap between neighbours is <= epsilon. Each
// cluster with at least min_rows members becomes a Seed.
std::vector<Seed> seed_columns(const Matrix& m, double epsilon, std::uint32_t min_rows);

struct RefineStep {
    bool deleted_row = false;     // false: deleted a column
    std::uint32_t index = 0;      // matrix row/column index that was removed
    double msr_after = 0.0;
};

// Expand the seed to all columns, then greedily delete the single row or
// column whose removal leaves the smallest MSR until msr <= delta. Ties
// prefer row deletion, then the lowest index. Returns nothing if the size
// floors (2 rows, min_cols columns) are hit first. When `trace` is given,
// every applied deletion is recorded in order.
std::optional<Bicluster> refine(const Matrix& m, const Seed& seed, const MiningParams& params,
                                std::vector<RefineStep>* trace = nullptr);

// Keep the first occurrence of each (rows, cols) form; order output by
// descending area, then canonical form.
std::vector<Bicluster> dedup(std::vector<Bicluster> biclusters);

// seed_columns -> refine -> dedup -> truncate to max_biclusters.
std::vector<Bicluster> mine(const Matrix& m, const MiningParams& params);

std::string biclusters_to_json(const std::vector<Bicluster>& biclusters);
std::vector<Bicluster> biclusters_from_json(const std::string& text);

}  // namespace kgaug
