#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "kgaug/kgraph.hpp"

using namespace kgaug;

namespace {

FeatureMatrix labeled_table() {
    FeatureMatrix m;
    m.sample_ids = {"p1", "p2"};
    m.feature_names = {"size", "shape"};
    m.values = Matrix::from_rows({{1, 2}, {3, 2}});
    m.labels = {0, 1};
    m.cell_text = {"1", "2", "3", "2"};
    return m;
}

QuantizedFeature quantized_of(std::uint32_t index, std::vector<std::uint32_t> bins) {
    QuantizedFeature q;
    q.index = index;
    q.n_bins = 5;
    q.bins = std::move(bins);
    q.edges = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    return q;
}

}  // namespace

TEST_CASE("triples_from_table counts: features plus label per patient") {
    auto m = labeled_table();
    m.sample_ids = {"p1"};
    m.labels = {1};
    m.values = Matrix::from_rows({{1, 2}});
    m.cell_text = {"1", "2"};
    const auto t = triples_from_table(m, {});
    CHECK(t.original.size() == 3);   // 2 features + 1 diagnosis
    CHECK(t.augmented.empty());

    const auto t3 = triples_from_table(
        m, {quantized_of(0, {1}), quantized_of(1, {2}), quantized_of(2, {0})});
    CHECK(t3.augmented.size() == 3);
}

TEST_CASE("object entities embed the feature name") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {1, 4})});
    // both features have value 2 somewhere; the objects must stay distinct
    const NamedTriple size_triple{"patient:p2", "has:size", "val:size=3"};
    const NamedTriple shape_triple{"patient:p1", "has:shape", "val:shape=2"};
    CHECK(std::binary_search(t.original.begin(), t.original.end(), size_triple));
    CHECK(std::binary_search(t.original.begin(), t.original.end(), shape_triple));
    const NamedTriple aug{"patient:p2", "has:AUG0", "val:AUG0=4"};
    CHECK(std::binary_search(t.augmented.begin(), t.augmented.end(), aug));
}

TEST_CASE("diagnosis triples restricted to the given rows") {
    const auto t = triples_from_table(labeled_table(), {}, {}, {1});
    const NamedTriple held_out{"patient:p1", "diagnosis", "label:benign"};
    const NamedTriple kept{"patient:p2", "diagnosis", "label:malignant"};
    CHECK(!std::binary_search(t.original.begin(), t.original.end(), held_out));
    CHECK(std::binary_search(t.original.begin(), t.original.end(), kept));
}

TEST_CASE("fuse with empty augmented set equals the original graph") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {1, 2})});
    const auto base = fuse(t.original, {});
    const auto again = fuse(t.original, {});
    CHECK(base.entity_names == again.entity_names);
    CHECK(base.triples == again.triples);
    CHECK(base.triples.size() == t.original.size());
}

TEST_CASE("fuse is idempotent and deduplicates overlapping triples") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {1, 2})});
    const auto g1 = fuse(t.original, t.augmented);
    const auto g2 = fuse(t.original, t.augmented);
    CHECK(g1.entity_names == g2.entity_names);
    CHECK(g1.relation_names == g2.relation_names);
    CHECK(g1.triples == g2.triples);

    // a triple present in both sets appears once
    auto overlap = t.augmented;
    overlap.insert(overlap.end(), t.original.begin(), t.original.end());
    make_set(overlap);
    const auto g3 = fuse(t.original, overlap);
    CHECK(g3.triples.size() == t.original.size() + t.augmented.size());
}

TEST_CASE("fused size is bounded by the sum with equality iff disjoint") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {1, 2})});
    const auto g = fuse(t.original, t.augmented);
    CHECK(g.triples.size() <= t.original.size() + t.augmented.size());
    CHECK(g.triples.size() == t.original.size() + t.augmented.size());   // disjoint by naming
}

TEST_CASE("patients are always subjects, never objects") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {0, 3})});
    const auto g = fuse(t.original, t.augmented);
    for (const auto& tr : g.triples) {
        CHECK(g.entity_names[tr.subject].rfind("patient:", 0) == 0);
        CHECK(g.entity_names[tr.object].rfind("patient:", 0) != 0);
    }
}

TEST_CASE("graph vocabularies hold three disjoint name families") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {0, 3})});
    const auto g = fuse(t.original, t.augmented);
    for (const auto& name : g.entity_names) {
        const bool patient = name.rfind("patient:", 0) == 0;
        const bool value = name.rfind("val:", 0) == 0;
        const bool label = name.rfind("label:", 0) == 0;
        CHECK(static_cast<int>(patient) + static_cast<int>(value) + static_cast<int>(label) == 1);
    }
}

TEST_CASE("every patient has at most one diagnosis triple") {
    const auto t = triples_from_table(labeled_table(), {});
    const auto g = fuse(t.original, {});
    for (std::uint32_t e = 0; e < g.num_entities(); ++e) {
        std::size_t count = 0;
        for (const auto& tr : g.triples)
            if (tr.subject == e && tr.relation == g.diagnosis_relation) ++count;
        CHECK(count <= 1);
    }
}

TEST_CASE("triple file round-trips the graph bit-exactly") {
    const auto t = triples_from_table(labeled_table(), {quantized_of(0, {4, 1})});
    const auto g = fuse(t.original, t.augmented);

    std::ostringstream out;
    save_triples(out, named_triples(g));
    const std::string text = out.str();

    std::istringstream in(text);
    const auto loaded = load_triples(in, "roundtrip");
    const auto g2 = fuse(loaded, {});
    CHECK(g2.entity_names == g.entity_names);
    CHECK(g2.relation_names == g.relation_names);
    CHECK(g2.triples == g.triples);

    std::ostringstream out2;
    save_triples(out2, named_triples(g2));
    CHECK(out2.str() == text);
}

TEST_CASE("triple file loader skips comments and rejects malformed lines") {
    std::istringstream ok("# comment\npatient:a\thas:f\tval:f=1\n\n");
    const auto t = load_triples(ok, "test");
    CHECK(t.size() == 1);

    std::istringstream bad("patient:a has:f val:f=1\n");
    CHECK_THROWS_AS(load_triples(bad, "test"), std::runtime_error);
}

TEST_CASE("reciprocal option adds inverse triples") {
    GraphOptions opts;
    opts.reciprocal = true;
    const auto t = triples_from_table(labeled_table(), {}, opts);
    const NamedTriple inv{"val:size=1", "inv:has:size", "patient:p1"};
    CHECK(std::binary_search(t.original.begin(), t.original.end(), inv));
}

TEST_CASE("misaligned augmented features are rejected") {
    CHECK_THROWS_AS(triples_from_table(labeled_table(), {quantized_of(0, {1})}),
                    std::runtime_error);
}

TEST_CASE("label entities resolve even when no diagnosis triple exists") {
    auto m = labeled_table();
    m.labels.clear();
    const auto t = triples_from_table(m, {});
    const auto g = fuse(t.original, {});
    CHECK(g.entity_names[g.label_entities[0]] == "label:benign");
    CHECK(g.entity_names[g.label_entities[1]] == "label:malignant");
    CHECK(g.relation_names[g.diagnosis_relation] == "diagnosis");
}
