#include <doctest.h>

#include <algorithm>
#include <iterator>
#include <limits>

#include "kgaug/bicluster.hpp"
#include "kgaug/rng.hpp"
#include "support/oracles.hpp"

using namespace kgaug;

TEST_CASE("msr is zero on constant and additive submatrices") {
    Matrix constant(3, 3, 0.7);
    const std::vector<std::uint32_t> rows{0, 1, 2}, cols{0, 1, 2};
    CHECK(msr(constant, rows, cols) == doctest::Approx(0.0).epsilon(1e-15));

    Matrix additive(4, 3);
    const double a[] = {0.1, 0.5, 0.2, 0.9}, b[] = {0.0, 0.3, 0.6};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) additive(i, j) = a[i] + b[j];
    const std::vector<std::uint32_t> rows4{0, 1, 2, 3};
    CHECK(msr(additive, rows4, cols) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("msr matches the hand-computed 2x2 case") {
    const auto m = Matrix::from_rows({{0, 0}, {0, 1}});
    CHECK(msr(m, {0, 1}, {0, 1}) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("msr equals the brute-force oracle on random submatrices") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nr = 2 + rng.below(6), nc = 2 + rng.below(5);
        Matrix m(nr + 2, nc + 2);
        for (auto& v : m.data()) v = rng.uniform();
        std::vector<std::uint32_t> rows, cols;
        for (std::uint32_t i = 0; i < nr; ++i) rows.push_back(i);
        for (std::uint32_t j = 0; j < nc; ++j) cols.push_back(j);
        CHECK(msr(m, rows, cols) == doctest::Approx(oracle::msr(m, rows, cols)).epsilon(1e-12));
    }
}

TEST_CASE("msr is invariant under constant, row, and column shifts") {
    Rng rng(7);
    Matrix m(5, 4);
    for (auto& v : m.data()) v = rng.uniform();
    const std::vector<std::uint32_t> rows{0, 1, 2, 3, 4}, cols{0, 1, 2, 3};
    const double base = msr(m, rows, cols);

    Matrix shifted = m;
    for (auto& v : shifted.data()) v += 3.17;
    CHECK(msr(shifted, rows, cols) == doctest::Approx(base).epsilon(1e-9));

    Matrix rowshift = m;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) rowshift(i, j) += 0.31 * static_cast<double>(i);
    CHECK(msr(rowshift, rows, cols) == doctest::Approx(base).epsilon(1e-9));

    Matrix colshift = m;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) colshift(i, j) += 0.77 * static_cast<double>(j);
    CHECK(msr(colshift, rows, cols) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("msr rejects empty index sets") {
    Matrix m(2, 2, 0.0);
    CHECK_THROWS_AS(msr(m, {}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(msr(m, {0}, {}), std::invalid_argument);
}

TEST_CASE("seed_columns merges values within epsilon") {
    Matrix m(3, 1);
    m(0, 0) = 0.10;
    m(1, 0) = 0.11;
    m(2, 0) = 0.90;
    const auto seeds = seed_columns(m, 0.05, 2);
    REQUIRE(seeds.size() == 1);
    CHECK(seeds[0].column == 0);
    CHECK(seeds[0].rows == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("seed_columns on a constant column returns all rows") {
    Matrix m(5, 1, 0.4);
    const auto seeds = seed_columns(m, 0.05, 2);
    REQUIRE(seeds.size() == 1);
    CHECK(seeds[0].rows.size() == 5);
}

TEST_CASE("seed_columns with all gaps above epsilon returns nothing") {
    Matrix m(4, 1);
    for (std::size_t i = 0; i < 4; ++i) m(i, 0) = 0.3 * static_cast<double>(i);
    CHECK(seed_columns(m, 0.05, 2).empty());
}

TEST_CASE("refine returns the expansion unchanged when already coherent") {
    Matrix m(4, 3, 0.5);
    Seed seed{0, {0, 1, 2, 3}};
    MiningParams params;
    params.min_rows = 2;
    const auto b = refine(m, seed, params);
    REQUIRE(b.has_value());
    CHECK(b->rows.size() == 4);
    CHECK(b->cols.size() == 3);
    CHECK(b->msr == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("refine recovers a planted coherent block") {
    for (std::uint64_t seed_val = 0; seed_val < 10; ++seed_val) {
        const auto planted = oracle::planted_block(24, 7, 8, 4, 1000 + seed_val);
        MiningParams params;
        params.min_rows = 4;
        params.epsilon = 0.03;
        const auto found = mine(planted.matrix, params);
        REQUIRE(!found.empty());
        // Best found block must overlap the planted block substantially.
        std::size_t best_overlap = 0;
        for (const auto& b : found) {
            std::vector<std::uint32_t> common;
            std::set_intersection(b.rows.begin(), b.rows.end(), planted.rows.begin(),
                                  planted.rows.end(), std::back_inserter(common));
            best_overlap = std::max(best_overlap, common.size());
        }
        CHECK(best_overlap >= 6);
    }
}

TEST_CASE("refine gives up when the floor is reached with msr above delta") {
    Rng rng(3);
    Matrix m(4, 2);
    for (auto& v : m.data()) v = rng.uniform();
    Seed seed{0, {0, 1, 2, 3}};
    MiningParams params;
    params.min_rows = 2;
    params.min_cols = 2;
    params.delta = 1e-12;
    CHECK(!refine(m, seed, params).has_value());
}

TEST_CASE("refine greedy step equals the exhaustive argmin oracle") {
    Rng rng(2024);
    int steps_checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t nr = 3 + rng.below(4);   // up to 6 rows
        const std::size_t nc = 3 + rng.below(3);   // up to 5 cols
        Matrix m(nr, nc);
        for (auto& v : m.data()) v = rng.uniform();

        MiningParams params;
        params.min_rows = 2;
        params.min_cols = 2;
        params.delta = 1e-9;   // unreachable: exercises the whole deletion path

        for (const auto& seed : seed_columns(m, 1.1, 2)) {
            std::vector<RefineStep> trace;
            refine(m, seed, params, &trace);

            std::vector<std::uint32_t> rows = seed.rows, cols;
            for (std::uint32_t j = 0; j < nc; ++j) cols.push_back(j);
            for (const auto& step : trace) {
                // Exhaustive candidate scan with the documented tie rule:
                // rows before columns, lowest index first, strict improvement.
                bool best_is_row = false;
                std::uint32_t best_index = 0;
                double best = std::numeric_limits<double>::infinity();
                bool any = false;
                if (rows.size() > 2) {
                    for (std::size_t a = 0; a < rows.size(); ++a) {
                        auto r2 = rows;
                        r2.erase(r2.begin() + static_cast<std::ptrdiff_t>(a));
                        const double s = oracle::msr(m, r2, cols);
                        if (!any || s < best) {
                            any = true;
                            best = s;
                            best_is_row = true;
                            best_index = rows[a];
                        }
                    }
                }
                if (cols.size() > params.min_cols) {
                    for (std::size_t b = 0; b < cols.size(); ++b) {
                        auto c2 = cols;
                        c2.erase(c2.begin() + static_cast<std::ptrdiff_t>(b));
                        const double s = oracle::msr(m, rows, c2);
                        if (!any || s < best) {
                            any = true;
                            best = s;
                            best_is_row = false;
                            best_index = cols[b];
                        }
                    }
                }
                REQUIRE(any);
                CHECK(step.deleted_row == best_is_row);
                CHECK(step.index == best_index);
                CHECK(step.msr_after == doctest::Approx(best).epsilon(1e-9));
                ++steps_checked;

                auto& target = step.deleted_row ? rows : cols;
                target.erase(std::find(target.begin(), target.end(), step.index));
            }
        }
    }
    CHECK(steps_checked > 200);
}

TEST_CASE("dedup keeps one copy and orders by area") {
    Bicluster small{{0, 1}, {0, 1}, 0.0, {0.5, 0.5}};
    Bicluster big{{0, 1, 2}, {0, 1, 2}, 0.0, {0.5, 0.5, 0.5}};
    const auto out = dedup({small, big, small, small});
    REQUIRE(out.size() == 2);
    CHECK(out[0].rows.size() == 3);
    CHECK(out[1].rows.size() == 2);

    const auto disjoint = dedup({small, big});
    CHECK(disjoint.size() == 2);
}

TEST_CASE("mine output satisfies the msr contract") {
    Rng rng(5);
    Matrix m(30, 6);
    for (auto& v : m.data()) v = rng.uniform();
    MiningParams params;
    params.delta = 0.02;
    const auto found = mine(m, params);
    for (const auto& b : found) {
        CHECK(b.rows.size() >= 2);
        CHECK(b.cols.size() >= params.min_cols);
        CHECK(b.msr <= params.delta);
        CHECK(b.msr == doctest::Approx(oracle::msr(m, b.rows, b.cols)).epsilon(1e-9));
    }
}

TEST_CASE("mine recovers a planted 10x4 additive block") {
    const auto planted = oracle::planted_block(30, 8, 10, 4, 77);
    MiningParams params;
    params.min_rows = 4;
    params.epsilon = 0.03;
    const auto found = mine(planted.matrix, params);
    REQUIRE(!found.empty());

    std::size_t best_rows = 0, best_cols = 0;
    for (const auto& b : found) {
        std::vector<std::uint32_t> r, c;
        std::set_intersection(b.rows.begin(), b.rows.end(), planted.rows.begin(),
                              planted.rows.end(), std::back_inserter(r));
        std::set_intersection(b.cols.begin(), b.cols.end(), planted.cols.begin(),
                              planted.cols.end(), std::back_inserter(c));
        if (r.size() * c.size() > best_rows * best_cols) {
            best_rows = r.size();
            best_cols = c.size();
        }
    }
    CHECK(best_rows >= 9);
    CHECK(best_cols >= 4);
}

TEST_CASE("mine truncates to max_biclusters by area") {
    Matrix m(12, 6, 0.0);
    // two constant blocks at different values, larger one first by area
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 6; ++j) m(i, j) = (i < 7) ? 0.2 : 0.8;
    MiningParams params;
    params.min_rows = 3;
    params.max_biclusters = 1;
    const auto found = mine(m, params);
    REQUIRE(found.size() == 1);
    CHECK(found[0].rows.size() == 7);
}

TEST_CASE("mine is deterministic byte for byte") {
    Rng rng(11);
    Matrix m(25, 5);
    for (auto& v : m.data()) v = rng.uniform();
    MiningParams params;
    const auto a = biclusters_to_json(mine(m, params));
    const auto b = biclusters_to_json(mine(m, params));
    CHECK(a == b);
}

TEST_CASE("bicluster json round-trips") {
    const auto planted = oracle::planted_block(20, 6, 8, 3, 5);
    MiningParams params;
    params.min_rows = 3;
    const auto found = mine(planted.matrix, params);
    const auto text = biclusters_to_json(found);
    const auto back = biclusters_from_json(text);
    REQUIRE(back.size() == found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        CHECK(back[i].rows == found[i].rows);
        CHECK(back[i].cols == found[i].cols);
        CHECK(back[i].msr == found[i].msr);
        CHECK(back[i].centroid == found[i].centroid);
    }
}

TEST_CASE("mining params validation") {
    MiningParams p;
    p.epsilon = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.min_cols = 1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.max_biclusters = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    CHECK(p.resolved_min_rows(200) == 10);
    CHECK(p.resolved_min_rows(30) == 4);
}
