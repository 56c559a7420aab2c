#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgaug/augment.hpp"
#include "kgaug/rng.hpp"
#include "support/oracles.hpp"

using namespace kgaug;

TEST_CASE("centroid of a constant block is the constant") {
    Matrix m(4, 3, 0.6);
    Bicluster b{{0, 1, 2}, {0, 2}, 0.0, {}};
    const auto t = centroid(m, b);
    REQUIRE(t.size() == 2);
    CHECK(t[0] == doctest::Approx(0.6));
    CHECK(t[1] == doctest::Approx(0.6));
}

TEST_CASE("centroid averages rows") {
    Matrix m(2, 1);
    m(0, 0) = 0.0;
    m(1, 0) = 1.0;
    Bicluster b{{0, 1}, {0}, 0.0, {}};
    CHECK(centroid(m, b)[0] == doctest::Approx(0.5));
}

TEST_CASE("distance is zero exactly at the centroid and sqrt(k) one unit away") {
    Matrix m(3, 4, 0.0);
    // sample 1 differs by 1.0 in each of the 3 bicluster columns
    m(1, 0) = 1.0;
    m(1, 1) = 1.0;
    m(1, 3) = 1.0;
    Bicluster b{{0, 2}, {0, 1, 3}, 0.0, {0.0, 0.0, 0.0}};
    const auto features = distance_features(m, {b});
    REQUIRE(features.size() == 1);
    const auto& f = features[0];
    CHECK(f.values[0] == 0.0);
    CHECK(f.values[2] == 0.0);
    CHECK(f.values[1] == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("distances match the per-sample summation oracle") {
    Rng rng(21);
    Matrix m(5, 3);
    for (auto& v : m.data()) v = rng.uniform();
    Bicluster b{{1, 3}, {0, 2}, 0.0, {}};
    b.centroid = centroid(m, b);
    const auto features = distance_features(m, {b});
    for (std::size_t s = 0; s < 5; ++s) {
        double sum = 0.0;
        for (std::size_t k = 0; k < b.cols.size(); ++k) {
            const double d = m(s, b.cols[k]) - b.centroid[k];
            sum += d * d;
        }
        CHECK(features[0].values[s] == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
    }
}

TEST_CASE("distance features satisfy the centroid triangle inequality") {
    Rng rng(33);
    Matrix m(12, 5);
    for (auto& v : m.data()) v = rng.uniform();
    Bicluster b{{0, 1, 2, 3}, {1, 2, 4}, 0.0, {}};
    b.centroid = centroid(m, b);
    const auto f = distance_features(m, {b})[0];
    for (std::size_t a = 0; a < 12; ++a) {
        for (std::size_t c = 0; c < 12; ++c) {
            double dist2 = 0.0;
            for (const auto j : b.cols) {
                const double d = m(a, j) - m(c, j);
                dist2 += d * d;
            }
            CHECK(std::abs(f.values[a] - f.values[c]) <= std::sqrt(dist2) + 1e-12);
        }
    }
}

TEST_CASE("members sit closer to the centroid than outsiders on planted data") {
    int hits = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const auto planted = oracle::planted_block(30, 6, 10, 3, 4000 + t, 0.01);
        Bicluster b{planted.rows, planted.cols, 0.0, {}};
        b.centroid = centroid(planted.matrix, b);
        const auto f = distance_features(planted.matrix, {b})[0];
        double inside = 0.0, outside = 0.0;
        std::size_t n_in = 0, n_out = 0;
        for (std::uint32_t i = 0; i < 30; ++i) {
            const bool member =
                std::binary_search(planted.rows.begin(), planted.rows.end(), i);
            (member ? inside : outside) += f.values[i];
            (member ? n_in : n_out) += 1;
        }
        if (inside / static_cast<double>(n_in) <= outside / static_cast<double>(n_out)) ++hits;
    }
    CHECK(hits >= trials * 95 / 100);
}

TEST_CASE("quantize splits values into equal-width bins") {
    AugmentedFeature f;
    f.values = {0.0, 0.5, 1.0};
    const auto q = quantize(f, 2);
    CHECK(q.bins == std::vector<std::uint32_t>{0, 1, 1});
    REQUIRE(q.edges.size() == 3);
    CHECK(q.edges[0] == 0.0);
    CHECK(q.edges[1] == doctest::Approx(0.5));
    CHECK(q.edges[2] == 1.0);
}

TEST_CASE("quantize maps a constant feature to bin zero") {
    AugmentedFeature f;
    f.values = {0.3, 0.3, 0.3};
    const auto q = quantize(f, 4);
    CHECK(std::all_of(q.bins.begin(), q.bins.end(),
                      [](std::uint32_t b) { return b == 0; }));
}

TEST_CASE("bins are recomputable from the emitted edges") {
    Rng rng(8);
    AugmentedFeature f;
    for (int i = 0; i < 200; ++i) f.values.push_back(rng.uniform());
    const auto q = quantize(f, 5);

    std::vector<std::size_t> counts(5, 0);
    for (std::size_t s = 0; s < f.values.size(); ++s) {
        const double v = f.values[s];
        // last bin whose lower edge is <= v
        std::uint32_t expect = 0;
        for (std::uint32_t b = 0; b < 5; ++b)
            if (v >= q.edges[b]) expect = b;
        // boundary values may round to either side of an edge
        CHECK(std::abs(static_cast<int>(q.bins[s]) - static_cast<int>(expect)) <= 1);
        counts[q.bins[s]] += 1;
    }
    CHECK(std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

TEST_CASE("quantization is monotone") {
    Rng rng(9);
    AugmentedFeature f;
    for (int i = 0; i < 100; ++i) f.values.push_back(rng.uniform(0.0, 2.0));
    const auto q = quantize(f, 7);
    for (std::size_t a = 0; a < f.values.size(); ++a)
        for (std::size_t b = 0; b < f.values.size(); ++b)
            if (f.values[a] <= f.values[b]) CHECK(q.bins[a] <= q.bins[b]);
}

TEST_CASE("quantize validates arguments") {
    AugmentedFeature f;
    f.values = {1.0};
    CHECK_THROWS_AS(quantize(f, 1), std::invalid_argument);
    AugmentedFeature empty;
    CHECK_THROWS_AS(quantize(empty, 3), std::invalid_argument);
}
