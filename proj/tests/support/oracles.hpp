#pragma once

// Independent brute-force reference implementations. Everything here is
// written from the defining formulas, deliberately sharing no code with the
// library paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "kgaug/matrix.hpp"
#include "kgaug/rng.hpp"
#include "kgaug/tucker.hpp"

namespace oracle {

// Mean squared residue by literal summation of the residue definition.
inline double msr(const kgaug::Matrix& m, const std::vector<std::uint32_t>& rows,
                  const std::vector<std::uint32_t>& cols) {
    const double nr = static_cast<double>(rows.size());
    const double nc = static_cast<double>(cols.size());
    double overall = 0.0;
    for (const auto i : rows)
        for (const auto j : cols) overall += m(i, j);
    overall /= nr * nc;

    double sum = 0.0;
    for (const auto i : rows) {
        double row_mean = 0.0;
        for (const auto j : cols) row_mean += m(i, j);
        row_mean /= nc;
        for (const auto j : cols) {
            double col_mean = 0.0;
            for (const auto r : rows) col_mean += m(r, j);
            col_mean /= nr;
            const double res = m(i, j) - row_mean - col_mean + overall;
            sum += res * res;
        }
    }
    return sum / (nr * nc);
}

// phi(s,r,o) by explicit triple summation over the core tensor, then sigmoid.
inline double tucker_score(const kgaug::TuckerModel& model, std::uint32_t s, std::uint32_t r,
                           std::uint32_t o) {
    double phi = 0.0;
    for (std::uint32_t a = 0; a < model.k_e; ++a) {
        for (std::uint32_t b = 0; b < model.k_r; ++b) {
            for (std::uint32_t c = 0; c < model.k_e; ++c) {
                phi += model.core[(static_cast<std::size_t>(a) * model.k_r + b) * model.k_e + c] *
                       model.entity_embeddings[static_cast<std::size_t>(s) * model.k_e + a] *
                       model.relation_embeddings[static_cast<std::size_t>(r) * model.k_r + b] *
                       model.entity_embeddings[static_cast<std::size_t>(o) * model.k_e + c];
            }
        }
    }
    return 1.0 / (1.0 + std::exp(-phi));
}

// Central finite difference of `f` wrt one coordinate of `param`.
inline double central_difference(std::vector<double>& param, std::size_t index,
                                 const std::function<double()>& f, double h = 1e-6) {
    const double saved = param[index];
    param[index] = saved + h;
    const double up = f();
    param[index] = saved - h;
    const double down = f();
    param[index] = saved;
    return (up - down) / (2.0 * h);
}

// AUC as the pairwise Mann-Whitney statistic with midrank tie handling.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

struct PlantedBlock {
    kgaug::Matrix matrix;
    std::vector<std::uint32_t> rows;
    std::vector<std::uint32_t> cols;
};

// Uniform noise with one additive block (row effect + column effect) planted
// at random row/column subsets. The block is coherent (zero residue) before
// the small jitter term.
inline PlantedBlock planted_block(std::size_t m, std::size_t n, std::size_t block_rows,
                                  std::size_t block_cols, std::uint64_t seed,
                                  double jitter = 0.0) {
    kgaug::Rng rng(seed);
    PlantedBlock out;
    out.matrix = kgaug::Matrix(m, n);
    for (auto& v : out.matrix.data()) v = rng.uniform();

    std::vector<std::uint32_t> all_rows(m), all_cols(n);
    for (std::size_t i = 0; i < m; ++i) all_rows[i] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 0; j < n; ++j) all_cols[j] = static_cast<std::uint32_t>(j);
    rng.shuffle(all_rows);
    rng.shuffle(all_cols);
    out.rows.assign(all_rows.begin(), all_rows.begin() + static_cast<std::ptrdiff_t>(block_rows));
    out.cols.assign(all_cols.begin(), all_cols.begin() + static_cast<std::ptrdiff_t>(block_cols));
    std::sort(out.rows.begin(), out.rows.end());
    std::sort(out.cols.begin(), out.cols.end());

    // Additive block: per-row and per-column effects, zero residue before
    // jitter. Row effects stay small so the block is column-coherent, which
    // is the structure the per-column seeding is built to find.
    std::vector<double> row_effect(block_rows), col_effect(block_cols);
    for (auto& v : row_effect) v = rng.uniform(0.0, 0.02);
    for (auto& v : col_effect) v = rng.uniform(0.0, 0.55);
    for (std::size_t a = 0; a < block_rows; ++a) {
        for (std::size_t b = 0; b < block_cols; ++b) {
            double v = 0.2 + row_effect[a] + col_effect[b];
            if (jitter > 0.0) v += rng.uniform(-jitter, jitter);
            out.matrix(out.rows[a], out.cols[b]) = std::min(v, 1.0);
        }
    }
    return out;
}

}  // namespace oracle
