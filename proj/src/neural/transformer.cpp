#include "newsbench/neural/transformer.hpp"

#include <cmath>

#include "newsbench/errors.hpp"
#include "newsbench/features.hpp"
#include "newsbench/neural/loss.hpp"

namespace newsbench {

// ---------------------------------------------------------------------------
// EncoderLayer
// ---------------------------------------------------------------------------

EncoderLayer::EncoderLayer(const std::string& name, const TransformerConfig& config, Rng& rng)
    : attn(name + ".attn",
           AttentionConfig{config.d_model, config.heads, config.disentangled, config.rel_k}, rng),
      ffn(name + ".ffn", config.d_model, config.d_ff, rng),
      ln1(name + ".ln1", config.d_model),
      ln2(name + ".ln2", config.d_model) {
    drop.p = config.dropout;
}

Mat EncoderLayer::forward(const Mat& x, const std::vector<unsigned char>& valid, Rng* drop_rng,
                          Cache* cache, std::vector<Mat>* probs_out) const {
    Mat a = attn.forward(x, valid, cache ? &cache->attn : nullptr, probs_out);
    a = drop.forward(a, drop_rng, cache ? &cache->d1 : nullptr);
    add_inplace(a, x);
    Mat h = ln1.forward(a, cache ? &cache->ln1 : nullptr);

    Mat f = ffn.forward(h, cache ? &cache->ffn : nullptr);
    f = drop.forward(f, drop_rng, cache ? &cache->d2 : nullptr);
    add_inplace(f, h);
    return ln2.forward(f, cache ? &cache->ln2 : nullptr);
}

Mat EncoderLayer::backward(const Mat& dy, const Cache& cache) {
    Mat dsum2 = ln2.backward(dy, cache.ln2);
    Mat dffn = drop.backward(dsum2, cache.d2);
    Mat dh = ffn.backward(dffn, cache.ffn);
    add_inplace(dh, dsum2);

    Mat dsum1 = ln1.backward(dh, cache.ln1);
    Mat dattn = drop.backward(dsum1, cache.d1);
    Mat dx = attn.backward(dattn, cache.attn);
    add_inplace(dx, dsum1);
    return dx;
}

void EncoderLayer::params(ParamList& out) {
    attn.params(out);
    ffn.params(out);
    ln1.params(out);
    ln2.params(out);
}

// ---------------------------------------------------------------------------
// TransformerModel
// ---------------------------------------------------------------------------

TransformerModel::TransformerModel(const TransformerConfig& config) : cfg_(config) {
    if (cfg_.vocab == 0) throw ConfigError("transformer vocab must be positive");
    if (cfg_.layers == 0) throw ConfigError("transformer needs at least one layer");
    if (cfg_.max_len == 0) throw ConfigError("transformer max_len must be positive");
    if (cfg_.dropout < 0.0 || cfg_.dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");

    Rng rng(derive_seed(cfg_.seed, "transformer.init"));
    emb_ = Embedding("emb", cfg_.vocab, cfg_.d_model, rng);

    has_pos_emb_ = !cfg_.disentangled || cfg_.decoder_absolute_positions;
    if (has_pos_emb_) {
        pos_emb_ = Tensor("pos_emb", cfg_.max_len, cfg_.d_model);
        pos_emb_.init_gaussian(rng, 0.02);
    }

    layers_.reserve(cfg_.layers);
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        layers_.emplace_back("layer" + std::to_string(l), cfg_, rng);
    }

    cls_head_ = Linear("cls_head", cfg_.d_model, 2, rng);
    if (cfg_.mlm_head) mlm_head_ = Linear("mlm_head", cfg_.d_model, cfg_.vocab, rng);
    if (cfg_.nsp_head) nsp_head_ = Linear("nsp_head", cfg_.d_model, 2, rng);
}

ParamList TransformerModel::params() {
    ParamList out;
    emb_.params(out);
    if (has_pos_emb_) out.push_back(&pos_emb_);
    for (EncoderLayer& layer : layers_) layer.params(out);
    cls_head_.params(out);
    if (cfg_.mlm_head) mlm_head_.params(out);
    if (cfg_.nsp_head) nsp_head_.params(out);
    return out;
}

Mat TransformerModel::encode(const std::vector<int>& ids, Rng* drop_rng, TrunkCache* cache,
                             std::vector<std::vector<Mat>>* probs_out) const {
    if (ids.empty()) throw DataError("empty sequence in transformer encode");
    if (ids.size() > cfg_.max_len) throw DataError("sequence exceeds transformer max_len");

    std::vector<unsigned char> valid(ids.size());
    std::size_t n_valid = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        valid[i] = ids[i] != kPadId ? 1 : 0;
        n_valid += valid[i];
    }

    Mat x = emb_.forward(ids, cache ? &cache->emb : nullptr);
    // The standard variant injects absolute positions at the input; the
    // disentangled variant carries position information in the attention
    // scores instead.
    if (!cfg_.disentangled) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const double* prow = pos_emb_.v.data() + i * cfg_.d_model;
            double* xrow = x.row(i);
            for (std::size_t k = 0; k < cfg_.d_model; ++k) xrow[k] += prow[k];
        }
    }

    if (cache) {
        cache->layers.resize(layers_.size());
        cache->valid = valid;
        cache->n_valid = n_valid;
    }
    if (probs_out) probs_out->resize(layers_.size());

    for (std::size_t l = 0; l < layers_.size(); ++l) {
        x = layers_[l].forward(x, valid, drop_rng, cache ? &cache->layers[l] : nullptr,
                               probs_out ? &(*probs_out)[l] : nullptr);
    }
    return x;
}

void TransformerModel::trunk_backward(const Mat& dx_top, TrunkCache& cache) {
    Mat dx = dx_top;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        dx = layers_[l].backward(dx, cache.layers[l]);
    }
    if (!cfg_.disentangled) {
        for (std::size_t i = 0; i < dx.rows; ++i) {
            double* grow = pos_emb_.g.data() + i * cfg_.d_model;
            const double* drow = dx.row(i);
            for (std::size_t k = 0; k < cfg_.d_model; ++k) grow[k] += drow[k];
        }
    }
    emb_.backward(dx, cache.emb);
}

std::array<double, 2> TransformerModel::pooled_logits(const std::vector<int>& ids, Rng* drop_rng,
                                                      ClsCache* cache, const Linear& head) const {
    Mat enc = encode(ids, drop_rng, cache ? &cache->trunk : nullptr);
    std::vector<unsigned char> valid(ids.size());
    std::size_t n_valid = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        valid[i] = ids[i] != kPadId ? 1 : 0;
        n_valid += valid[i];
    }

    Mat pooled(1, cfg_.d_model);
    for (std::size_t i = 0; i < enc.rows; ++i) {
        if (!valid[i]) continue;
        const double* row = enc.row(i);
        for (std::size_t k = 0; k < cfg_.d_model; ++k) pooled.at(0, k) += row[k];
    }
    scale_inplace(pooled, 1.0 / static_cast<double>(n_valid));

    Mat logits = head.forward(pooled, cache ? &cache->head : nullptr);
    return {logits.at(0, 0), logits.at(0, 1)};
}

std::array<double, 2> TransformerModel::forward_logits(const std::vector<int>& ids,
                                                       Rng* dropout_rng) {
    return pooled_logits(ids, dropout_rng, &cls_cache_, cls_head_);
}

std::array<double, 2> TransformerModel::infer_logits(const std::vector<int>& ids) const {
    return pooled_logits(ids, nullptr, nullptr, cls_head_);
}

void TransformerModel::backward_logits(const std::array<double, 2>& dlogits) {
    Mat dl(1, 2);
    dl.at(0, 0) = dlogits[0];
    dl.at(0, 1) = dlogits[1];
    Mat dpooled = cls_head_.backward(dl, cls_cache_.head);

    const TrunkCache& trunk = cls_cache_.trunk;
    const std::size_t T = trunk.valid.size();
    Mat dx(T, cfg_.d_model);
    const double inv = 1.0 / static_cast<double>(trunk.n_valid);
    for (std::size_t i = 0; i < T; ++i) {
        if (!trunk.valid[i]) continue;
        double* row = dx.row(i);
        for (std::size_t k = 0; k < cfg_.d_model; ++k) row[k] = dpooled.at(0, k) * inv;
    }
    trunk_backward(dx, cls_cache_.trunk);
}

std::vector<std::vector<Mat>> TransformerModel::attention_probs(const std::vector<int>& ids) const {
    std::vector<std::vector<Mat>> probs;
    encode(ids, nullptr, nullptr, &probs);
    return probs;
}

double TransformerModel::mlm_step(const std::vector<int>& ids, const std::vector<int>& targets,
                                  Rng* dropout_rng, bool backprop, double grad_scale) {
    if (!cfg_.mlm_head) throw ConfigError("model has no MLM head");
    if (ids.size() != targets.size()) throw TrainError("mlm ids/targets length mismatch");

    TrunkCache trunk;
    Mat enc = encode(ids, dropout_rng, backprop ? &trunk : nullptr);

    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= 0 && ids[i] != kPadId) positions.push_back(i);
    }
    if (positions.empty()) return 0.0;

    Mat sel(positions.size(), cfg_.d_model);
    for (std::size_t r = 0; r < positions.size(); ++r) {
        const std::size_t i = positions[r];
        const double* src = enc.row(i);
        double* dst = sel.row(r);
        for (std::size_t k = 0; k < cfg_.d_model; ++k) dst[k] = src[k];
        if (cfg_.decoder_absolute_positions) {
            const double* prow = pos_emb_.v.data() + i * cfg_.d_model;
            for (std::size_t k = 0; k < cfg_.d_model; ++k) dst[k] += prow[k];
        }
    }

    Linear::Cache head_cache;
    Mat logits = mlm_head_.forward(sel, backprop ? &head_cache : nullptr);

    double loss = 0.0;
    Mat dlogits(positions.size(), cfg_.vocab);
    std::vector<double> drow;
    for (std::size_t r = 0; r < positions.size(); ++r) {
        const std::size_t target = static_cast<std::size_t>(targets[positions[r]]);
        loss += softmax_ce_vec(logits.row(r), cfg_.vocab, target, backprop ? &drow : nullptr);
        if (backprop) {
            double* out = dlogits.row(r);
            for (std::size_t c = 0; c < cfg_.vocab; ++c) out[c] = drow[c] * grad_scale;
        }
    }
    if (!std::isfinite(loss)) throw TrainError("non-finite MLM loss");

    if (backprop) {
        Mat dsel = mlm_head_.backward(dlogits, head_cache);
        Mat dx(ids.size(), cfg_.d_model);
        for (std::size_t r = 0; r < positions.size(); ++r) {
            const std::size_t i = positions[r];
            const double* src = dsel.row(r);
            double* dst = dx.row(i);
            for (std::size_t k = 0; k < cfg_.d_model; ++k) dst[k] += src[k];
            if (cfg_.decoder_absolute_positions) {
                double* grow = pos_emb_.g.data() + i * cfg_.d_model;
                for (std::size_t k = 0; k < cfg_.d_model; ++k) grow[k] += src[k];
            }
        }
        trunk_backward(dx, trunk);
    }
    return loss;
}

double TransformerModel::nsp_step(const std::vector<int>& ids, int label, Rng* dropout_rng,
                                  bool backprop, double grad_scale) {
    if (!cfg_.nsp_head) throw ConfigError("model has no NSP head");

    ClsCache cache;
    const std::array<double, 2> logits =
        pooled_logits(ids, dropout_rng, backprop ? &cache : nullptr, nsp_head_);

    std::array<double, 2> dlogits = {0.0, 0.0};
    const double loss = softmax_ce(logits, label, backprop ? &dlogits : nullptr);
    if (!std::isfinite(loss)) throw TrainError("non-finite NSP loss");

    if (backprop) {
        Mat dl(1, 2);
        dl.at(0, 0) = dlogits[0] * grad_scale;
        dl.at(0, 1) = dlogits[1] * grad_scale;
        Mat dpooled = nsp_head_.backward(dl, cache.head);

        const std::size_t T = cache.trunk.valid.size();
        Mat dx(T, cfg_.d_model);
        const double inv = 1.0 / static_cast<double>(cache.trunk.n_valid);
        for (std::size_t i = 0; i < T; ++i) {
            if (!cache.trunk.valid[i]) continue;
            double* row = dx.row(i);
            for (std::size_t k = 0; k < cfg_.d_model; ++k) row[k] = dpooled.at(0, k) * inv;
        }
        trunk_backward(dx, cache.trunk);
    }
    return loss;
}

}  // namespace newsbench
