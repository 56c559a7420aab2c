#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgaug/kgraph.hpp"
#include "kgaug/rng.hpp"

namespace kgaug {

// Training hyperparameters. Defaults are the reference setup: embedding
// dims 200, 200 epochs, Adam at 0.0005 with dropout 0.3/0.4/0.5.
struct TrainConfig {
    std::uint32_t epochs = 200;
    double learning_rate = 0.0005;
    double input_dropout = 0.3;
    double hidden_dropout1 = 0.4;
    double hidden_dropout2 = 0.5;
    std::uint32_t entity_dim = 200;     // k_e
    std::uint32_t relation_dim = 200;   // k_r
    std::uint32_t batch_size = 128;
    std::uint64_t seed = 0;
    bool batch_norm = false;            // ablation flag, off by default
    double label_smoothing = 0.0;       // ablation flag, off by default

    void validate() const;
};

struct BatchNormState {
    std::vector<double> gamma, beta;
    std::vector<double> running_mean, running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    void init(std::size_t dim);
};

// Link predictor scoring phi(s,r,o) = W x1 e_s x2 w_r x3 e_o with a single
// shared entity table for subjects and objects, sigmoid on the output.
struct TuckerModel {
    std::uint32_t m_e = 0, m_r = 0, k_e = 0, k_r = 0;
    std::vector<double> entity_embeddings;    // m_e x k_e row-major
    std::vector<double> relation_embeddings;  // m_r x k_r row-major
    std::vector<double> core;                 // k_e x k_r x k_e, index [a][b][c]
    bool batch_norm = false;
    BatchNormState bn_input, bn_hidden;       // active only when batch_norm
    std::uint64_t seed = 0;

    std::span<const double> entity(std::uint32_t e) const {
        return {entity_embeddings.data() + static_cast<std::size_t>(e) * k_e, k_e};
    }
    std::span<const double> relation(std::uint32_t r) const {
        return {relation_embeddings.data() + static_cast<std::size_t>(r) * k_r, k_r};
    }
    bool all_finite() const;
};

// Gradients of the trainable tensors, same shapes as the model.
struct TuckerGradients {
    std::vector<double> entity_embeddings;
    std::vector<double> relation_embeddings;
    std::vector<double> core;
    std::vector<double> bn_input_gamma, bn_input_beta;
    std::vector<double> bn_hidden_gamma, bn_hidden_beta;
};

// One 1-N query: every entity is scored against this (subject, relation).
struct Query {
    std::uint32_t subject = 0;
    std::uint32_t relation = 0;
};

// Embeddings drawn uniform symmetric scaled by 1/sqrt(dim); core uniform in
// [-0.1, 0.1]. Fully determined by config.seed.
TuckerModel init_model(std::uint32_t m_e, std::uint32_t m_r, const TrainConfig& config);

// Sigmoid scores over all entities for (s, r), evaluation mode: no dropout,
// batch norm (if enabled) uses running statistics. Deterministic.
std::vector<double> score_all(const TuckerModel& model, std::uint32_t subject,
                              std::uint32_t relation);

// Train-mode scoring for a single query: inverted dropout drawn from `rng`
// at the configured rates. Batch statistics degenerate on a single query, so
// batch norm still uses running statistics here; the training loop proper
// uses per-batch statistics.
std::vector<double> score_all_train(const TuckerModel& model, std::uint32_t subject,
                                    std::uint32_t relation, const TrainConfig& config, Rng& rng);

// Binary cross-entropy over all entities, averaged over entities and over
// the batch, plus analytic gradients. Dropout is applied only when `rng` is
// given (gradient checks run without it). Targets are one m_e-vector per
// query; with label smoothing ls they become (1-ls)*y + ls/m_e.
std::pair<double, TuckerGradients> loss_and_grads(const TuckerModel& model,
                                                  const std::vector<Query>& batch,
                                                  const std::vector<std::vector<double>>& targets,
                                                  const TrainConfig& config,
                                                  Rng* rng = nullptr);

struct TrainResult {
    TuckerModel model;
    std::vector<double> loss_history;   // per-epoch mean query loss
};

// Shuffled mini-batches over the distinct (s,r) queries of the graph with
// multi-hot targets, Adam updates (beta1 0.9, beta2 0.999, eps 1e-8).
// Single-threaded, deterministic given config.seed.
TrainResult train(const KnowledgeGraph& graph, const TrainConfig& config);

struct DiagnosisPrediction {
    double score_malignant = 0.0;   // sigmoid score of the malignant label entity
    double score_benign = 0.0;
    int label = 0;                  // 0 benign, 1 malignant; tie goes to benign
};

DiagnosisPrediction predict_diagnosis(const TuckerModel& model, const KnowledgeGraph& graph,
                                      std::uint32_t patient);

// Binary checkpoint: JSON header (dims, seed, config echo, vocabulary
// hashes) followed by raw little-endian doubles. Reload reproduces
// evaluation scores bitwise.
void save_checkpoint(const std::string& path, const TuckerModel& model,
                     const TrainConfig& config, const KnowledgeGraph& graph);
TuckerModel load_checkpoint(const std::string& path, const KnowledgeGraph* expected_graph = nullptr);

std::uint64_t vocab_hash(const std::vector<std::string>& names);

}  // namespace kgaug
