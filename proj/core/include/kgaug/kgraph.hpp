#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgaug/augment.hpp"
#include "kgaug/dataset.hpp"

namespace kgaug {

// Triple over vocabulary indices.
struct Triple {
    std::uint32_t subject = 0;
    std::uint32_t relation = 0;
    std::uint32_t object = 0;

    auto operator<=>(const Triple&) const = default;
};

// Triple over names, used before vocabularies exist. Sets of these are kept
// sorted and unique (set semantics).
struct NamedTriple {
    std::string subject;
    std::string relation;
    std::string object;

    auto operator<=>(const NamedTriple&) const = default;
};

using NamedTripleSet = std::vector<NamedTriple>;

struct GraphOptions {
    std::string diagnosis_relation = "diagnosis";
    std::array<std::string, 2> label_names = {"benign", "malignant"};
    bool reciprocal = false;   // adds (object, inv:<relation>, subject) triples
};

struct KnowledgeGraph {
    std::vector<std::string> entity_names;     // index -> name, sorted
    std::vector<std::string> relation_names;
    std::unordered_map<std::string, std::uint32_t> entity_index;
    std::unordered_map<std::string, std::uint32_t> relation_index;
    std::vector<Triple> triples;               // sorted, unique
    std::uint32_t diagnosis_relation = 0;
    std::array<std::uint32_t, 2> label_entities = {0, 0};   // [benign, malignant]

    std::size_t num_entities() const { return entity_names.size(); }
    std::size_t num_relations() const { return relation_names.size(); }
    std::uint32_t entity(const std::string& name) const;
    std::uint32_t relation(const std::string& name) const;
    bool has_triple(const Triple& t) const;
};

// Original triples: one (patient, has:<feature>, val:<feature>=<cell>) per
// cell plus one (patient, diagnosis, label:<name>) per labeled patient whose
// index is in `diagnosis_rows` (all labeled patients if empty). Augmented
// triples: (patient, has:AUG<i>, val:AUG<i>=<bin>). `attribute_rows`
// restricts which patients contribute attribute triples (all if empty);
// the default keeps every patient in the graph (transductive).
struct TableTriples {
    NamedTripleSet original;
    NamedTripleSet augmented;
};

TableTriples triples_from_table(const FeatureMatrix& m,
                                const std::vector<QuantizedFeature>& augmented,
                                const GraphOptions& options = {},
                                const std::vector<std::uint32_t>& diagnosis_rows = {},
                                const std::vector<std::uint32_t>& attribute_rows = {});

// Set union of the two triple sets; vocabulary indices assigned over sorted
// names so identical inputs always produce identical graphs.
KnowledgeGraph fuse(const NamedTripleSet& original, const NamedTripleSet& augmented,
                    const GraphOptions& options = {});

// Tab-separated `subject<TAB>relation<TAB>object` lines, '#' for comments.
void save_triples(std::ostream& out, const NamedTripleSet& triples);
void save_triples(const std::string& path, const NamedTripleSet& triples);
NamedTripleSet load_triples(std::istream& in, const std::string& origin);
NamedTripleSet load_triples(const std::string& path);

NamedTripleSet named_triples(const KnowledgeGraph& g);

// Canonicalize to set semantics: sort and drop exact duplicates.
void make_set(NamedTripleSet& triples);

}  // namespace kgaug
