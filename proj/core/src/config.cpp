#include "kgaug/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kgaug {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& origin, const std::string& what) {
    throw std::runtime_error(origin + ": " + what);
}

// Pulls known keys out of `obj`; finish() rejects leftovers so typos fail
// loudly instead of silently running defaults.
class StrictObject {
public:
    StrictObject(const json& obj, std::string origin, std::string scope)
        : obj_(obj), origin_(std::move(origin)), scope_(std::move(scope)) {
        if (!obj.is_object()) config_error(origin_, scope_ + " must be a JSON object");
        for (const auto& [key, value] : obj.items()) remaining_.insert(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!obj_.contains(key)) return;
        remaining_.erase(key);
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception& e) {
            config_error(origin_, "bad value for '" + key + "' in " + scope_ + ": " + e.what());
        }
    }

    const json* sub(const std::string& key) {
        if (!obj_.contains(key)) return nullptr;
        remaining_.erase(key);
        return &obj_.at(key);
    }

    void finish() const {
        if (!remaining_.empty())
            config_error(origin_, "unknown key '" + *remaining_.begin() + "' in " + scope_);
    }

private:
    const json& obj_;
    std::string origin_;
    std::string scope_;
    std::set<std::string> remaining_;
};

void parse_dataset(const json& obj, const std::string& origin, RunConfig& config) {
    StrictObject o(obj, origin, "dataset");
    o.get("path", config.dataset_path);
    o.get("name", config.dataset_name);
    o.get("id_column", config.schema.id_column);
    o.get("feature_columns", config.schema.feature_columns);
    o.get("label_column", config.schema.label_column);
    if (const auto* levels = o.sub("categorical_levels")) {
        if (!levels->is_object()) config_error(origin, "categorical_levels must be an object");
        for (const auto& [key, value] : levels->items())
            config.schema.categorical_levels[key] = value.get<std::vector<std::string>>();
    }
    if (const auto* labels = o.sub("label_map")) {
        if (!labels->is_object()) config_error(origin, "label_map must be an object");
        for (const auto& [key, value] : labels->items())
            config.schema.label_map[key] = value.get<int>();
    }
    std::vector<std::string> names;
    o.get("label_names", names);
    if (!names.empty()) {
        if (names.size() != 2) config_error(origin, "label_names must list exactly two names");
        config.schema.label_names = {names[0], names[1]};
    }
    o.finish();
}

void parse_mining(const json& obj, const std::string& origin, MiningParams& p) {
    StrictObject o(obj, origin, "mining");
    o.get("epsilon", p.epsilon);
    o.get("min_rows", p.min_rows);
    o.get("delta", p.delta);
    o.get("min_cols", p.min_cols);
    o.get("max_biclusters", p.max_biclusters);
    o.finish();
}

void parse_train(const json& obj, const std::string& origin, TrainConfig& t) {
    StrictObject o(obj, origin, "train");
    o.get("epochs", t.epochs);
    o.get("learning_rate", t.learning_rate);
    o.get("input_dropout", t.input_dropout);
    o.get("hidden_dropout1", t.hidden_dropout1);
    o.get("hidden_dropout2", t.hidden_dropout2);
    o.get("entity_dim", t.entity_dim);
    o.get("relation_dim", t.relation_dim);
    o.get("batch_size", t.batch_size);
    o.get("seed", t.seed);
    o.get("batch_norm", t.batch_norm);
    o.get("label_smoothing", t.label_smoothing);
    o.finish();
}

void parse_eval(const json& obj, const std::string& origin, SweepOptions& s) {
    StrictObject o(obj, origin, "eval");
    o.get("ratios", s.ratios);
    o.get("seeds", s.seeds);
    std::string variant = "both";
    o.get("variant", variant);
    if (variant == "baseline") {
        s.run_baseline = true;
        s.run_augmented = false;
    } else if (variant == "augmented") {
        s.run_baseline = false;
        s.run_augmented = true;
    } else if (variant == "both") {
        s.run_baseline = s.run_augmented = true;
    } else {
        config_error(origin, "variant must be baseline, augmented, or both");
    }
    o.get("transductive", s.transductive);
    o.get("mine_train_only", s.mine_train_only);
    o.get("normalize_train_only", s.normalize_train_only);
    o.get("renormalize_roc", s.renormalize_roc);
    o.finish();
}

void parse_graph(const json& obj, const std::string& origin, GraphOptions& g) {
    StrictObject o(obj, origin, "graph");
    o.get("diagnosis_relation", g.diagnosis_relation);
    o.get("reciprocal", g.reciprocal);
    o.finish();
}

}  // namespace

void RunConfig::validate() const {
    mining.validate();
    train.validate();
    if (n_bins < 2) throw std::runtime_error("config: augment.n_bins must be >= 2");
    for (const double r : sweep.ratios)
        if (!(r > 0.0 && r < 1.0)) throw std::runtime_error("config: ratios must lie in (0,1)");
    if (sweep.seeds.empty()) throw std::runtime_error("config: eval.seeds must not be empty");
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        config_error(origin, std::string("invalid JSON: ") + e.what());
    }

    RunConfig config;
    {
        StrictObject o(root, origin, "config");
        if (const auto* d = o.sub("dataset")) parse_dataset(*d, origin, config);
        if (const auto* m = o.sub("mining")) parse_mining(*m, origin, config.mining);
        if (const auto* a = o.sub("augment")) {
            StrictObject ao(*a, origin, "augment");
            ao.get("n_bins", config.n_bins);
            ao.finish();
        }
        if (const auto* g = o.sub("graph")) parse_graph(*g, origin, config.graph);
        if (const auto* t = o.sub("train")) parse_train(*t, origin, config.train);
        if (const auto* e = o.sub("eval")) parse_eval(*e, origin, config.sweep);
        o.get("output_dir", config.output_dir);
        o.finish();
    }

    if (config.dataset_name.empty() && !config.dataset_path.empty())
        config.dataset_name = std::filesystem::path(config.dataset_path).stem().string();
    config.graph.label_names = config.schema.label_names;
    config.sweep.mining = config.mining;
    config.sweep.n_bins = config.n_bins;
    config.sweep.graph = config.graph;
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path);
}

std::string run_config_to_json(const RunConfig& c) {
    json levels = json::object();
    for (const auto& [name, lv] : c.schema.categorical_levels) levels[name] = lv;
    json label_map = json::object();
    for (const auto& [name, v] : c.schema.label_map) label_map[name] = v;

    const json root = {
        {"dataset",
         {{"path", c.dataset_path},
          {"name", c.dataset_name},
          {"id_column", c.schema.id_column},
          {"feature_columns", c.schema.feature_columns},
          {"label_column", c.schema.label_column},
          {"categorical_levels", levels},
          {"label_map", label_map},
          {"label_names", c.schema.label_names}}},
        {"mining",
         {{"epsilon", c.mining.epsilon},
          {"min_rows", c.mining.min_rows},
          {"delta", c.mining.delta},
          {"min_cols", c.mining.min_cols},
          {"max_biclusters", c.mining.max_biclusters}}},
        {"augment", {{"n_bins", c.n_bins}}},
        {"graph",
         {{"diagnosis_relation", c.graph.diagnosis_relation},
          {"reciprocal", c.graph.reciprocal}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"learning_rate", c.train.learning_rate},
          {"input_dropout", c.train.input_dropout},
          {"hidden_dropout1", c.train.hidden_dropout1},
          {"hidden_dropout2", c.train.hidden_dropout2},
          {"entity_dim", c.train.entity_dim},
          {"relation_dim", c.train.relation_dim},
          {"batch_size", c.train.batch_size},
          {"seed", c.train.seed},
          {"batch_norm", c.train.batch_norm},
          {"label_smoothing", c.train.label_smoothing}}},
        {"eval",
         {{"ratios", c.sweep.ratios},
          {"seeds", c.sweep.seeds},
          {"variant", c.sweep.run_baseline && c.sweep.run_augmented
                          ? "both"
                          : (c.sweep.run_baseline ? "baseline" : "augmented")},
          {"transductive", c.sweep.transductive},
          {"mine_train_only", c.sweep.mine_train_only},
          {"normalize_train_only", c.sweep.normalize_train_only},
          {"renormalize_roc", c.sweep.renormalize_roc}}},
        {"output_dir", c.output_dir},
    };
    return root.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string text = run_config_to_json(config);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace kgaug
