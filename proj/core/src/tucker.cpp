#include "kgaug/tucker.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace kgaug {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kProbClamp = 1e-12;   // loss-side clamp only, gradients stay p - y

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Deterministic derived streams so init and training draw independently of
// each other for the same user seed.
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream));
}

// M[a][c] = sum_b W[a][b][c] * wr[b]
void contract_relation(const TuckerModel& model, std::uint32_t rel, std::vector<double>& out) {
    const std::size_t ke = model.k_e, kr = model.k_r;
    out.assign(ke * ke, 0.0);
    const double* wr = model.relation_embeddings.data() + static_cast<std::size_t>(rel) * kr;
    const double* w = model.core.data();
    for (std::size_t a = 0; a < ke; ++a) {
        double* mrow = out.data() + a * ke;
        for (std::size_t b = 0; b < kr; ++b) {
            const double coef = wr[b];
            const double* wrow = w + (a * kr + b) * ke;
            for (std::size_t c = 0; c < ke; ++c) mrow[c] += coef * wrow[c];
        }
    }
}

void batchnorm_eval(const BatchNormState& bn, std::span<double> v) {
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double inv = 1.0 / std::sqrt(bn.running_var[j] + bn.eps);
        v[j] = (v[j] - bn.running_mean[j]) * inv * bn.gamma[j] + bn.beta[j];
    }
}

struct BatchNormCache {
    std::vector<double> mean, inv_std;
    std::vector<double> xhat;   // B x dim
};

// Training-mode batch norm over a B x dim block, in place. Uses biased batch
// variance for normalization and updates running statistics.
void batchnorm_train_forward(BatchNormState& bn, std::vector<double>& x, std::size_t batch,
                             std::size_t dim, BatchNormCache& cache) {
    cache.mean.assign(dim, 0.0);
    cache.inv_std.assign(dim, 0.0);
    cache.xhat.assign(batch * dim, 0.0);

    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < dim; ++j) cache.mean[j] += x[i * dim + j];
    for (auto& v : cache.mean) v /= static_cast<double>(batch);

    std::vector<double> var(dim, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = x[i * dim + j] - cache.mean[j];
            var[j] += d * d;
        }
    }
    for (auto& v : var) v /= static_cast<double>(batch);

    for (std::size_t j = 0; j < dim; ++j) {
        cache.inv_std[j] = 1.0 / std::sqrt(var[j] + bn.eps);
        const double unbiased =
            batch > 1 ? var[j] * static_cast<double>(batch) / static_cast<double>(batch - 1)
                      : var[j];
        bn.running_mean[j] = (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * cache.mean[j];
        bn.running_var[j] = (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * unbiased;
    }

    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double xh = (x[i * dim + j] - cache.mean[j]) * cache.inv_std[j];
            cache.xhat[i * dim + j] = xh;
            x[i * dim + j] = xh * bn.gamma[j] + bn.beta[j];
        }
    }
}

void batchnorm_backward(const BatchNormState& bn, const BatchNormCache& cache,
                        const std::vector<double>& gy, std::size_t batch, std::size_t dim,
                        std::vector<double>& gx, std::vector<double>& ggamma,
                        std::vector<double>& gbeta) {
    std::vector<double> sum_g(dim, 0.0), sum_gx(dim, 0.0);
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double g = gy[i * dim + j] * bn.gamma[j];
            sum_g[j] += g;
            sum_gx[j] += g * cache.xhat[i * dim + j];
            ggamma[j] += gy[i * dim + j] * cache.xhat[i * dim + j];
            gbeta[j] += gy[i * dim + j];
        }
    }
    gx.assign(batch * dim, 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double g = gy[i * dim + j] * bn.gamma[j];
            gx[i * dim + j] =
                cache.inv_std[j] * (g - inv_b * sum_g[j] - inv_b * cache.xhat[i * dim + j] * sum_gx[j]);
        }
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    auto check_rate = [](double p, const char* name) {
        if (!(p >= 0.0 && p < 1.0))
            throw std::invalid_argument(std::string("TrainConfig: ") + name + " must be in [0,1)");
    };
    check_rate(input_dropout, "input_dropout");
    check_rate(hidden_dropout1, "hidden_dropout1");
    check_rate(hidden_dropout2, "hidden_dropout2");
    if (entity_dim == 0 || relation_dim == 0)
        throw std::invalid_argument("TrainConfig: embedding dims must be positive");
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
        throw std::invalid_argument("TrainConfig: label_smoothing must be in [0,1)");
}

void BatchNormState::init(std::size_t dim) {
    gamma.assign(dim, 1.0);
    beta.assign(dim, 0.0);
    running_mean.assign(dim, 0.0);
    running_var.assign(dim, 1.0);
}

bool TuckerModel::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    bool fine = ok(entity_embeddings) && ok(relation_embeddings) && ok(core);
    if (batch_norm) {
        fine = fine && ok(bn_input.gamma) && ok(bn_input.beta) && ok(bn_hidden.gamma) &&
               ok(bn_hidden.beta) && ok(bn_input.running_mean) && ok(bn_input.running_var) &&
               ok(bn_hidden.running_mean) && ok(bn_hidden.running_var);
    }
    return fine;
}

TuckerModel init_model(std::uint32_t m_e, std::uint32_t m_r, const TrainConfig& config) {
    config.validate();
    if (m_e < 2) throw std::invalid_argument("init_model: need at least 2 entities");
    if (m_r < 1) throw std::invalid_argument("init_model: need at least 1 relation");

    TuckerModel model;
    model.m_e = m_e;
    model.m_r = m_r;
    model.k_e = config.entity_dim;
    model.k_r = config.relation_dim;
    model.seed = config.seed;
    model.batch_norm = config.batch_norm;

    Rng rng(derive_seed(config.seed, 0));
    const double bound_e = 1.0 / std::sqrt(static_cast<double>(model.k_e));
    const double bound_r = 1.0 / std::sqrt(static_cast<double>(model.k_r));

    model.entity_embeddings.resize(static_cast<std::size_t>(m_e) * model.k_e);
    for (auto& v : model.entity_embeddings) v = rng.uniform(-bound_e, bound_e);
    model.relation_embeddings.resize(static_cast<std::size_t>(m_r) * model.k_r);
    for (auto& v : model.relation_embeddings) v = rng.uniform(-bound_r, bound_r);
    model.core.resize(static_cast<std::size_t>(model.k_e) * model.k_r * model.k_e);
    for (auto& v : model.core) v = rng.uniform(-0.1, 0.1);

    if (model.batch_norm) {
        model.bn_input.init(model.k_e);
        model.bn_hidden.init(model.k_e);
    }
    return model;
}

std::vector<double> score_all(const TuckerModel& model, std::uint32_t subject,
                              std::uint32_t relation) {
    if (subject >= model.m_e) throw std::out_of_range("score_all: unknown subject entity");
    if (relation >= model.m_r) throw std::out_of_range("score_all: unknown relation");

    const std::size_t ke = model.k_e;
    std::vector<double> x(model.entity(subject).begin(), model.entity(subject).end());
    if (model.batch_norm) batchnorm_eval(model.bn_input, x);

    std::vector<double> m;
    contract_relation(model, relation, m);

    std::vector<double> h(ke, 0.0);
    for (std::size_t a = 0; a < ke; ++a) {
        const double coef = x[a];
        const double* mrow = m.data() + a * ke;
        for (std::size_t c = 0; c < ke; ++c) h[c] += coef * mrow[c];
    }
    if (model.batch_norm) batchnorm_eval(model.bn_hidden, h);

    std::vector<double> scores(model.m_e);
    for (std::uint32_t o = 0; o < model.m_e; ++o) {
        const double* eo = model.entity_embeddings.data() + static_cast<std::size_t>(o) * ke;
        double phi = 0.0;
        for (std::size_t c = 0; c < ke; ++c) phi += h[c] * eo[c];
        scores[o] = std::clamp(sigmoid(phi), 1e-300, 1.0 - 1e-16);
    }
    return scores;
}

std::vector<double> score_all_train(const TuckerModel& model, std::uint32_t subject,
                                    std::uint32_t relation, const TrainConfig& config, Rng& rng) {
    if (subject >= model.m_e) throw std::out_of_range("score_all_train: unknown subject entity");
    if (relation >= model.m_r) throw std::out_of_range("score_all_train: unknown relation");

    const std::size_t ke = model.k_e;
    std::vector<double> x(model.entity(subject).begin(), model.entity(subject).end());
    if (model.batch_norm) batchnorm_eval(model.bn_input, x);

    auto dropout = [&rng](std::span<double> v, double p) {
        if (p <= 0.0) return;
        const double scale = 1.0 / (1.0 - p);
        for (auto& e : v) e = rng.uniform() < p ? 0.0 : e * scale;
    };
    dropout(x, config.input_dropout);

    std::vector<double> m;
    contract_relation(model, relation, m);
    dropout(m, config.hidden_dropout1);

    std::vector<double> h(ke, 0.0);
    for (std::size_t a = 0; a < ke; ++a) {
        const double coef = x[a];
        const double* mrow = m.data() + a * ke;
        for (std::size_t c = 0; c < ke; ++c) h[c] += coef * mrow[c];
    }
    if (model.batch_norm) batchnorm_eval(model.bn_hidden, h);
    dropout(h, config.hidden_dropout2);

    std::vector<double> scores(model.m_e);
    for (std::uint32_t o = 0; o < model.m_e; ++o) {
        const double* eo = model.entity_embeddings.data() + static_cast<std::size_t>(o) * ke;
        double phi = 0.0;
        for (std::size_t c = 0; c < ke; ++c) phi += h[c] * eo[c];
        scores[o] = sigmoid(phi);
    }
    return scores;
}

namespace {

// Scratch space for one forward/backward pass over a batch. Queries sharing
// a relation share the W x2 w_r contraction; dropout masks stay per query.
struct BatchWorkspace {
    std::vector<std::uint32_t> rel_of_query;     // index into rel_ids
    std::vector<std::uint32_t> rel_ids;          // distinct relations, sorted
    std::vector<std::vector<double>> rel_m;      // per distinct relation, k_e*k_e
    std::vector<std::vector<double>> rel_gm;     // gradient accumulators, same shape

    std::vector<double> x;        // B*k_e embedding rows (post bn0 when enabled)
    std::vector<double> xd;       // after input dropout
    std::vector<double> h;        // B*k_e pre-bn1
    std::vector<double> hd;       // after bn1 affine + hidden dropout 2
    std::vector<double> gh;       // gradient wrt hd then wrt h
    std::vector<double> gx;       // gradient wrt xd then x
    std::vector<std::uint8_t> mask0, mask2;   // B*k_e keep flags
    std::vector<std::uint8_t> mask1;          // B*k_e*k_e keep flags
    std::vector<double> probs;    // B*m_e
    BatchNormCache bn0_cache, bn1_cache;
};

double run_batch(TuckerModel& model, const std::vector<Query>& batch,
                 const std::vector<std::vector<double>>& targets, const TrainConfig& config,
                 Rng* rng, TuckerGradients& grads, BatchWorkspace& ws) {
    const std::size_t B = batch.size();
    const std::size_t ke = model.k_e, kr = model.k_r, me = model.m_e;
    const bool drop0 = rng && config.input_dropout > 0.0;
    const bool drop1 = rng && config.hidden_dropout1 > 0.0;
    const bool drop2 = rng && config.hidden_dropout2 > 0.0;
    const double scale0 = drop0 ? 1.0 / (1.0 - config.input_dropout) : 1.0;
    const double scale1 = drop1 ? 1.0 / (1.0 - config.hidden_dropout1) : 1.0;
    const double scale2 = drop2 ? 1.0 / (1.0 - config.hidden_dropout2) : 1.0;

    // Distinct relations of this batch, shared contraction.
    ws.rel_ids.clear();
    for (const auto& q : batch) ws.rel_ids.push_back(q.relation);
    std::sort(ws.rel_ids.begin(), ws.rel_ids.end());
    ws.rel_ids.erase(std::unique(ws.rel_ids.begin(), ws.rel_ids.end()), ws.rel_ids.end());
    ws.rel_m.resize(ws.rel_ids.size());
    ws.rel_gm.assign(ws.rel_ids.size(), {});
    for (std::size_t i = 0; i < ws.rel_ids.size(); ++i) {
        contract_relation(model, ws.rel_ids[i], ws.rel_m[i]);
        ws.rel_gm[i].assign(ke * ke, 0.0);
    }
    ws.rel_of_query.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
        ws.rel_of_query[b] = static_cast<std::uint32_t>(
            std::lower_bound(ws.rel_ids.begin(), ws.rel_ids.end(), batch[b].relation) -
            ws.rel_ids.begin());
    }

    // Forward: subject embeddings, optional bn0, input dropout.
    ws.x.assign(B * ke, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const auto es = model.entity(batch[b].subject);
        std::copy(es.begin(), es.end(), ws.x.begin() + b * ke);
    }
    if (model.batch_norm) batchnorm_train_forward(model.bn_input, ws.x, B, ke, ws.bn0_cache);

    ws.xd = ws.x;
    if (drop0) {
        ws.mask0.resize(B * ke);
        for (std::size_t i = 0; i < B * ke; ++i) {
            ws.mask0[i] = rng->uniform() < config.input_dropout ? 0 : 1;
            ws.xd[i] = ws.mask0[i] ? ws.xd[i] * scale0 : 0.0;
        }
    }

    // h = x^T (mask1 . M_r), per query.
    if (drop1) {
        ws.mask1.resize(B * ke * ke);
        for (auto& m : ws.mask1) m = rng->uniform() < config.hidden_dropout1 ? 0 : 1;
    }
    ws.h.assign(B * ke, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const double* m = ws.rel_m[ws.rel_of_query[b]].data();
        const double* x = ws.xd.data() + b * ke;
        double* h = ws.h.data() + b * ke;
        if (drop1) {
            const std::uint8_t* mask = ws.mask1.data() + b * ke * ke;
            for (std::size_t a = 0; a < ke; ++a) {
                const double coef = x[a] * scale1;
                if (coef == 0.0) continue;
                const double* mrow = m + a * ke;
                const std::uint8_t* krow = mask + a * ke;
                for (std::size_t c = 0; c < ke; ++c)
                    if (krow[c]) h[c] += coef * mrow[c];
            }
        } else {
            for (std::size_t a = 0; a < ke; ++a) {
                const double coef = x[a];
                if (coef == 0.0) continue;
                const double* mrow = m + a * ke;
                for (std::size_t c = 0; c < ke; ++c) h[c] += coef * mrow[c];
            }
        }
    }

    ws.hd = ws.h;
    if (model.batch_norm) batchnorm_train_forward(model.bn_hidden, ws.hd, B, ke, ws.bn1_cache);
    if (drop2) {
        ws.mask2.resize(B * ke);
        for (std::size_t i = 0; i < B * ke; ++i) {
            ws.mask2[i] = rng->uniform() < config.hidden_dropout2 ? 0 : 1;
            ws.hd[i] = ws.mask2[i] ? ws.hd[i] * scale2 : 0.0;
        }
    }

    // Scores against every entity, loss, and dL/dphi in one pass.
    ws.probs.assign(B * me, 0.0);
    double loss = 0.0;
    const double ls = config.label_smoothing;
    for (std::size_t b = 0; b < B; ++b) {
        const double* h = ws.hd.data() + b * ke;
        double* p = ws.probs.data() + b * me;
        const auto& y = targets[b];
        for (std::size_t o = 0; o < me; ++o) {
            const double* eo = model.entity_embeddings.data() + o * ke;
            double phi = 0.0;
            for (std::size_t c = 0; c < ke; ++c) phi += h[c] * eo[c];
            const double prob = sigmoid(phi);
            p[o] = prob;
            const double yo = ls > 0.0 ? (1.0 - ls) * y[o] + ls / static_cast<double>(me) : y[o];
            const double pc = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
            loss -= yo * std::log(pc) + (1.0 - yo) * std::log(1.0 - pc);
        }
    }
    loss /= static_cast<double>(me) * static_cast<double>(B);

    // Backward.
    const double gscale = 1.0 / (static_cast<double>(me) * static_cast<double>(B));
    ws.gh.assign(B * ke, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const double* p = ws.probs.data() + b * me;
        const double* h = ws.hd.data() + b * ke;
        double* gh = ws.gh.data() + b * ke;
        const auto& y = targets[b];
        for (std::size_t o = 0; o < me; ++o) {
            const double yo = ls > 0.0 ? (1.0 - ls) * y[o] + ls / static_cast<double>(me) : y[o];
            const double g = (p[o] - yo) * gscale;
            if (g == 0.0) continue;
            const double* eo = model.entity_embeddings.data() + o * ke;
            double* geo = grads.entity_embeddings.data() + o * ke;
            for (std::size_t c = 0; c < ke; ++c) {
                gh[c] += g * eo[c];
                geo[c] += g * h[c];
            }
        }
    }

    if (drop2) {
        for (std::size_t i = 0; i < B * ke; ++i)
            ws.gh[i] = ws.mask2[i] ? ws.gh[i] * scale2 : 0.0;
    }
    if (model.batch_norm) {
        std::vector<double> gh0;
        batchnorm_backward(model.bn_hidden, ws.bn1_cache, ws.gh, B, ke, gh0,
                           grads.bn_hidden_gamma, grads.bn_hidden_beta);
        ws.gh = std::move(gh0);
    }

    // Through the bilinear stage: gx = (mask1 . M) gh, gM += x (x) gh.
    ws.gx.assign(B * ke, 0.0);
    for (std::size_t b = 0; b < B; ++b) {
        const double* m = ws.rel_m[ws.rel_of_query[b]].data();
        double* gm = ws.rel_gm[ws.rel_of_query[b]].data();
        const double* x = ws.xd.data() + b * ke;
        const double* gh = ws.gh.data() + b * ke;
        double* gx = ws.gx.data() + b * ke;
        if (drop1) {
            const std::uint8_t* mask = ws.mask1.data() + b * ke * ke;
            for (std::size_t a = 0; a < ke; ++a) {
                const double coef = x[a] * scale1;
                const double* mrow = m + a * ke;
                double* gmrow = gm + a * ke;
                const std::uint8_t* krow = mask + a * ke;
                double acc = 0.0;
                for (std::size_t c = 0; c < ke; ++c) {
                    if (!krow[c]) continue;
                    acc += mrow[c] * gh[c];
                    gmrow[c] += coef * gh[c];
                }
                gx[a] = acc * scale1;
            }
        } else {
            for (std::size_t a = 0; a < ke; ++a) {
                const double coef = x[a];
                const double* mrow = m + a * ke;
                double* gmrow = gm + a * ke;
                double acc = 0.0;
                for (std::size_t c = 0; c < ke; ++c) {
                    acc += mrow[c] * gh[c];
                    gmrow[c] += coef * gh[c];
                }
                gx[a] = acc;
            }
        }
    }

    if (drop0) {
        for (std::size_t i = 0; i < B * ke; ++i)
            ws.gx[i] = ws.mask0[i] ? ws.gx[i] * scale0 : 0.0;
    }
    if (model.batch_norm) {
        std::vector<double> gx0;
        batchnorm_backward(model.bn_input, ws.bn0_cache, ws.gx, B, ke, gx0,
                           grads.bn_input_gamma, grads.bn_input_beta);
        ws.gx = std::move(gx0);
    }
    for (std::size_t b = 0; b < B; ++b) {
        double* ge = grads.entity_embeddings.data() +
                     static_cast<std::size_t>(batch[b].subject) * ke;
        const double* gx = ws.gx.data() + b * ke;
        for (std::size_t c = 0; c < ke; ++c) ge[c] += gx[c];
    }

    // Fold relation-matrix gradients into the core and relation tables.
    for (std::size_t i = 0; i < ws.rel_ids.size(); ++i) {
        const std::uint32_t r = ws.rel_ids[i];
        const double* gm = ws.rel_gm[i].data();
        const double* wr = model.relation_embeddings.data() + static_cast<std::size_t>(r) * kr;
        double* gwr = grads.relation_embeddings.data() + static_cast<std::size_t>(r) * kr;
        for (std::size_t a = 0; a < ke; ++a) {
            const double* gmrow = gm + a * ke;
            for (std::size_t b = 0; b < kr; ++b) {
                const double coef = wr[b];
                const double* wrow = model.core.data() + (a * kr + b) * ke;
                double* gwrow = grads.core.data() + (a * kr + b) * ke;
                double acc = 0.0;
                for (std::size_t c = 0; c < ke; ++c) {
                    gwrow[c] += coef * gmrow[c];
                    acc += wrow[c] * gmrow[c];
                }
                gwr[b] += acc;
            }
        }
    }

    return loss;
}

TuckerGradients make_gradients(const TuckerModel& model) {
    TuckerGradients g;
    g.entity_embeddings.assign(model.entity_embeddings.size(), 0.0);
    g.relation_embeddings.assign(model.relation_embeddings.size(), 0.0);
    g.core.assign(model.core.size(), 0.0);
    if (model.batch_norm) {
        g.bn_input_gamma.assign(model.k_e, 0.0);
        g.bn_input_beta.assign(model.k_e, 0.0);
        g.bn_hidden_gamma.assign(model.k_e, 0.0);
        g.bn_hidden_beta.assign(model.k_e, 0.0);
    }
    return g;
}

}  // namespace

std::pair<double, TuckerGradients> loss_and_grads(const TuckerModel& model,
                                                  const std::vector<Query>& batch,
                                                  const std::vector<std::vector<double>>& targets,
                                                  const TrainConfig& config, Rng* rng) {
    if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
    if (batch.size() != targets.size())
        throw std::invalid_argument("loss_and_grads: batch/target size mismatch");
    for (const auto& t : targets)
        if (t.size() != model.m_e)
            throw std::invalid_argument("loss_and_grads: target vector must have length m_e");

    TuckerGradients grads = make_gradients(model);
    BatchWorkspace ws;
    // Forward mutates only batch-norm running statistics; keep the caller's
    // model untouched here.
    TuckerModel scratch = model;
    const double loss = run_batch(scratch, batch, targets, config, rng, grads, ws);
    return {loss, std::move(grads)};
}

namespace {

struct AdamState {
    std::vector<double> m, v;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_update(std::vector<double>& param, const std::vector<double>& grad, AdamState& state,
                 double lr, std::uint64_t step) {
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
}

}  // namespace

TrainResult train(const KnowledgeGraph& graph, const TrainConfig& config) {
    config.validate();
    if (graph.triples.empty()) throw std::invalid_argument("train: graph has no triples");

    const auto m_e = static_cast<std::uint32_t>(graph.num_entities());
    const auto m_r = static_cast<std::uint32_t>(graph.num_relations());

    // Distinct (s,r) queries with their observed objects (1-N scoring).
    std::vector<Query> queries;
    std::vector<std::vector<std::uint32_t>> objects;
    for (const auto& t : graph.triples) {   // triples are sorted by (s,r,o)
        if (queries.empty() || queries.back().subject != t.subject ||
            queries.back().relation != t.relation) {
            queries.push_back({t.subject, t.relation});
            objects.emplace_back();
        }
        objects.back().push_back(t.object);
    }

    TrainResult result;
    result.model = init_model(m_e, m_r, config);
    result.loss_history.reserve(config.epochs);

    TuckerGradients grads = make_gradients(result.model);
    AdamState adam_e(result.model.entity_embeddings.size());
    AdamState adam_r(result.model.relation_embeddings.size());
    AdamState adam_w(result.model.core.size());
    AdamState adam_bn0g(config.batch_norm ? result.model.k_e : 0);
    AdamState adam_bn0b(config.batch_norm ? result.model.k_e : 0);
    AdamState adam_bn1g(config.batch_norm ? result.model.k_e : 0);
    AdamState adam_bn1b(config.batch_norm ? result.model.k_e : 0);
    std::uint64_t step = 0;

    Rng rng(derive_seed(config.seed, 1));
    std::vector<std::uint32_t> order(queries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);

    BatchWorkspace ws;
    std::vector<Query> batch;
    std::vector<std::vector<double>> targets;

    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;

        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const std::size_t B = end - begin;
            batch.clear();
            targets.assign(B, std::vector<double>(m_e, 0.0));
            for (std::size_t b = 0; b < B; ++b) {
                const auto qi = order[begin + b];
                batch.push_back(queries[qi]);
                for (const auto o : objects[qi]) targets[b][o] = 1.0;
            }

            auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
            zero(grads.entity_embeddings);
            zero(grads.relation_embeddings);
            zero(grads.core);
            if (config.batch_norm) {
                zero(grads.bn_input_gamma);
                zero(grads.bn_input_beta);
                zero(grads.bn_hidden_gamma);
                zero(grads.bn_hidden_beta);
            }

            const double loss = run_batch(result.model, batch, targets, config, &rng, grads, ws);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(begin / config.batch_size));
            epoch_loss += loss * static_cast<double>(B);

            ++step;
            adam_update(result.model.entity_embeddings, grads.entity_embeddings, adam_e,
                        config.learning_rate, step);
            adam_update(result.model.relation_embeddings, grads.relation_embeddings, adam_r,
                        config.learning_rate, step);
            adam_update(result.model.core, grads.core, adam_w, config.learning_rate, step);
            if (config.batch_norm) {
                adam_update(result.model.bn_input.gamma, grads.bn_input_gamma, adam_bn0g,
                            config.learning_rate, step);
                adam_update(result.model.bn_input.beta, grads.bn_input_beta, adam_bn0b,
                            config.learning_rate, step);
                adam_update(result.model.bn_hidden.gamma, grads.bn_hidden_gamma, adam_bn1g,
                            config.learning_rate, step);
                adam_update(result.model.bn_hidden.beta, grads.bn_hidden_beta, adam_bn1b,
                            config.learning_rate, step);
            }
        }

        result.loss_history.push_back(epoch_loss / static_cast<double>(queries.size()));
    }
    return result;
}

DiagnosisPrediction predict_diagnosis(const TuckerModel& model, const KnowledgeGraph& graph,
                                      std::uint32_t patient) {
    if (patient >= graph.num_entities())
        throw std::out_of_range("predict_diagnosis: unknown patient entity");
    const auto scores = score_all(model, patient, graph.diagnosis_relation);
    DiagnosisPrediction pred;
    pred.score_benign = scores[graph.label_entities[0]];
    pred.score_malignant = scores[graph.label_entities[1]];
    pred.label = pred.score_malignant > pred.score_benign ? 1 : 0;
    return pred;
}

std::uint64_t vocab_hash(const std::vector<std::string>& names) {
    std::uint64_t h = 0xCBF29CE484222325ULL;   // FNV-1a
    for (const auto& name : names) {
        for (const char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 0x100000001B3ULL;
    }
    return h;
}

namespace {

constexpr char kCheckpointMagic[] = "KGAUGCKPT1\n";

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint truncated");
}

nlohmann::json config_to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"input_dropout", c.input_dropout},
            {"hidden_dropout1", c.hidden_dropout1},
            {"hidden_dropout2", c.hidden_dropout2},
            {"entity_dim", c.entity_dim},
            {"relation_dim", c.relation_dim},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"batch_norm", c.batch_norm},
            {"label_smoothing", c.label_smoothing}};
}

}  // namespace

void save_checkpoint(const std::string& path, const TuckerModel& model,
                     const TrainConfig& config, const KnowledgeGraph& graph) {
    nlohmann::json header = {
        {"m_e", model.m_e},
        {"m_r", model.m_r},
        {"k_e", model.k_e},
        {"k_r", model.k_r},
        {"seed", model.seed},
        {"batch_norm", model.batch_norm},
        {"entity_vocab_hash", vocab_hash(graph.entity_names)},
        {"relation_vocab_hash", vocab_hash(graph.relation_names)},
        {"config", config_to_json(config)},
    };
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    const std::uint64_t len = header_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    write_doubles(out, model.entity_embeddings);
    write_doubles(out, model.relation_embeddings);
    write_doubles(out, model.core);
    if (model.batch_norm) {
        write_doubles(out, model.bn_input.gamma);
        write_doubles(out, model.bn_input.beta);
        write_doubles(out, model.bn_input.running_mean);
        write_doubles(out, model.bn_input.running_var);
        write_doubles(out, model.bn_hidden.gamma);
        write_doubles(out, model.bn_hidden.beta);
        write_doubles(out, model.bn_hidden.running_mean);
        write_doubles(out, model.bn_hidden.running_var);
    }
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

TuckerModel load_checkpoint(const std::string& path, const KnowledgeGraph* expected_graph) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");

    char magic[sizeof(kCheckpointMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("'" + path + "' is not a kgaug checkpoint");

    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string header_text(len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("checkpoint header truncated");
    const auto header = nlohmann::json::parse(header_text);

    TuckerModel model;
    model.m_e = header.at("m_e").get<std::uint32_t>();
    model.m_r = header.at("m_r").get<std::uint32_t>();
    model.k_e = header.at("k_e").get<std::uint32_t>();
    model.k_r = header.at("k_r").get<std::uint32_t>();
    model.seed = header.at("seed").get<std::uint64_t>();
    model.batch_norm = header.at("batch_norm").get<bool>();

    if (expected_graph) {
        if (header.at("entity_vocab_hash").get<std::uint64_t>() !=
                vocab_hash(expected_graph->entity_names) ||
            header.at("relation_vocab_hash").get<std::uint64_t>() !=
                vocab_hash(expected_graph->relation_names))
            throw std::runtime_error("checkpoint '" + path +
                                     "' was trained on a different vocabulary");
    }

    read_doubles(in, model.entity_embeddings,
                 static_cast<std::size_t>(model.m_e) * model.k_e);
    read_doubles(in, model.relation_embeddings,
                 static_cast<std::size_t>(model.m_r) * model.k_r);
    read_doubles(in, model.core, static_cast<std::size_t>(model.k_e) * model.k_r * model.k_e);
    if (model.batch_norm) {
        read_doubles(in, model.bn_input.gamma, model.k_e);
        read_doubles(in, model.bn_input.beta, model.k_e);
        read_doubles(in, model.bn_input.running_mean, model.k_e);
        read_doubles(in, model.bn_input.running_var, model.k_e);
        read_doubles(in, model.bn_hidden.gamma, model.k_e);
        read_doubles(in, model.bn_hidden.beta, model.k_e);
        read_doubles(in, model.bn_hidden.running_mean, model.k_e);
        read_doubles(in, model.bn_hidden.running_var, model.k_e);
    }
    return model;
}

}  // namespace kgaug
