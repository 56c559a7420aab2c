#include "kgaug/kgraph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kgaug {

namespace {

std::string format_value(double v) {
    // Integral codes print without a decimal point, everything else with
    // shortest round-trip formatting.
    if (v == static_cast<double>(static_cast<long long>(v)))
        return std::to_string(static_cast<long long>(v));
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void check_name(const std::string& name) {
    if (name.find('\t') != std::string::npos || name.find('\n') != std::string::npos)
        throw std::runtime_error("triple component contains tab or newline: '" + name + "'");
}

}  // namespace

std::uint32_t KnowledgeGraph::entity(const std::string& name) const {
    const auto it = entity_index.find(name);
    if (it == entity_index.end())
        throw std::out_of_range("unknown entity '" + name + "'");
    return it->second;
}

std::uint32_t KnowledgeGraph::relation(const std::string& name) const {
    const auto it = relation_index.find(name);
    if (it == relation_index.end())
        throw std::out_of_range("unknown relation '" + name + "'");
    return it->second;
}

bool KnowledgeGraph::has_triple(const Triple& t) const {
    return std::binary_search(triples.begin(), triples.end(), t);
}

void make_set(NamedTripleSet& triples) {
    std::sort(triples.begin(), triples.end());
    triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
}

TableTriples triples_from_table(const FeatureMatrix& m,
                                const std::vector<QuantizedFeature>& augmented,
                                const GraphOptions& options,
                                const std::vector<std::uint32_t>& diagnosis_rows,
                                const std::vector<std::uint32_t>& attribute_rows) {
    for (const auto& q : augmented) {
        if (q.bins.size() != m.samples())
            throw std::runtime_error("augmented feature " + std::to_string(q.index) +
                                     " has " + std::to_string(q.bins.size()) +
                                     " values for " + std::to_string(m.samples()) + " samples");
    }

    std::vector<std::uint32_t> attr_rows = attribute_rows;
    if (attr_rows.empty()) {
        attr_rows.resize(m.samples());
        for (std::uint32_t i = 0; i < m.samples(); ++i) attr_rows[i] = i;
    }

    TableTriples out;
    const bool has_text = !m.cell_text.empty();

    for (const auto i : attr_rows) {
        const std::string patient = "patient:" + m.sample_ids[i];
        for (std::size_t j = 0; j < m.features(); ++j) {
            const std::string level =
                has_text ? m.cell_repr(i, j) : format_value(m.values(i, j));
            out.original.push_back({patient, "has:" + m.feature_names[j],
                                    "val:" + m.feature_names[j] + "=" + level});
        }
    }

    if (m.labeled()) {
        auto add_diagnosis = [&](std::uint32_t i) {
            out.original.push_back({"patient:" + m.sample_ids[i], options.diagnosis_relation,
                                    "label:" + options.label_names[m.labels[i]]});
        };
        if (diagnosis_rows.empty()) {
            for (std::uint32_t i = 0; i < m.samples(); ++i) add_diagnosis(i);
        } else {
            for (const auto i : diagnosis_rows) add_diagnosis(i);
        }
    }

    for (const auto& q : augmented) {
        const std::string feat = "AUG" + std::to_string(q.index);
        for (const auto i : attr_rows) {
            out.augmented.push_back({"patient:" + m.sample_ids[i], "has:" + feat,
                                     "val:" + feat + "=" + std::to_string(q.bins[i])});
        }
    }

    auto add_reciprocals = [](NamedTripleSet& s) {
        const std::size_t n = s.size();
        for (std::size_t i = 0; i < n; ++i)
            s.push_back({s[i].object, "inv:" + s[i].relation, s[i].subject});
    };
    if (options.reciprocal) {
        add_reciprocals(out.original);
        add_reciprocals(out.augmented);
    }

    make_set(out.original);
    make_set(out.augmented);
    return out;
}

KnowledgeGraph fuse(const NamedTripleSet& original, const NamedTripleSet& augmented,
                    const GraphOptions& options) {
    std::set<std::string> entities, relations;
    auto collect = [&](const NamedTripleSet& s) {
        for (const auto& t : s) {
            entities.insert(t.subject);
            entities.insert(t.object);
            relations.insert(t.relation);
        }
    };
    collect(original);
    collect(augmented);

    // The diagnosis machinery is part of the vocabulary even when no
    // diagnosis triple survived (e.g. every label held out).
    relations.insert(options.diagnosis_relation);
    entities.insert("label:" + options.label_names[0]);
    entities.insert("label:" + options.label_names[1]);

    KnowledgeGraph g;
    g.entity_names.assign(entities.begin(), entities.end());
    g.relation_names.assign(relations.begin(), relations.end());
    for (std::uint32_t i = 0; i < g.entity_names.size(); ++i)
        g.entity_index[g.entity_names[i]] = i;
    for (std::uint32_t i = 0; i < g.relation_names.size(); ++i)
        g.relation_index[g.relation_names[i]] = i;

    auto index = [&](const NamedTripleSet& s) {
        for (const auto& t : s)
            g.triples.push_back({g.entity_index.at(t.subject), g.relation_index.at(t.relation),
                                 g.entity_index.at(t.object)});
    };
    index(original);
    index(augmented);
    std::sort(g.triples.begin(), g.triples.end());
    g.triples.erase(std::unique(g.triples.begin(), g.triples.end()), g.triples.end());

    g.diagnosis_relation = g.relation_index.at(options.diagnosis_relation);
    g.label_entities = {g.entity_index.at("label:" + options.label_names[0]),
                        g.entity_index.at("label:" + options.label_names[1])};
    return g;
}

void save_triples(std::ostream& out, const NamedTripleSet& triples) {
    for (const auto& t : triples) {
        check_name(t.subject);
        check_name(t.relation);
        check_name(t.object);
        out << t.subject << '\t' << t.relation << '\t' << t.object << '\n';
    }
}

void save_triples(const std::string& path, const NamedTripleSet& triples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write triple file '" + path + "'");
    save_triples(out, triples);
}

NamedTripleSet load_triples(std::istream& in, const std::string& origin) {
    NamedTripleSet out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
            throw std::runtime_error(origin + ": line " + std::to_string(line_no) +
                                     " is not subject<TAB>relation<TAB>object");
        out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
    }
    make_set(out);
    return out;
}

NamedTripleSet load_triples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open triple file '" + path + "'");
    return load_triples(in, path);
}

NamedTripleSet named_triples(const KnowledgeGraph& g) {
    NamedTripleSet out;
    out.reserve(g.triples.size());
    for (const auto& t : g.triples)
        out.push_back({g.entity_names[t.subject], g.relation_names[t.relation],
                       g.entity_names[t.object]});
    make_set(out);
    return out;
}

}  // namespace kgaug
