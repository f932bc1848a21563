#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "newsbench/neural/attention.hpp"
#include "newsbench/neural/layers.hpp"
#include "newsbench/neural/net.hpp"

namespace newsbench {

// Model-vocabulary layout extends the sequence-id scheme from features.hpp
// (pad 0, oov 1, real tokens from 2) with two specials at the top.
constexpr std::size_t model_vocab_rows(std::size_t real_vocab) { return real_vocab + 4; }
constexpr int mask_token_id(std::size_t real_vocab) { return static_cast<int>(real_vocab) + 2; }
constexpr int sep_token_id(std::size_t real_vocab) { return static_cast<int>(real_vocab) + 3; }

struct TransformerConfig {
    std::size_t vocab = 0;  // embedding rows, usually model_vocab_rows(|V|)
    std::size_t d_model = 64;
    std::size_t heads = 2;
    std::size_t layers = 2;
    std::size_t d_ff = 128;
    std::size_t max_len = 256;
    double dropout = 0.1;
    bool disentangled = false;
    std::size_t rel_k = 32;
    // Enhanced mask decoder: add absolute position embeddings to the hidden
    // states right before the MLM output projection.
    bool decoder_absolute_positions = false;
    bool mlm_head = false;
    bool nsp_head = false;
    std::uint64_t seed = 0;
};

// Post-LN encoder layer: x -> LN(x + drop(attn(x))) -> LN(h + drop(ffn(h))).
struct EncoderLayer {
    MultiHeadAttention attn;
    Ffn ffn;
    LayerNorm ln1, ln2;
    Dropout drop;

    EncoderLayer() = default;
    EncoderLayer(const std::string& name, const TransformerConfig& config, Rng& rng);

    struct Cache {
        MultiHeadAttention::Cache attn;
        Ffn::Cache ffn;
        LayerNorm::Cache ln1, ln2;
        Dropout::Cache d1, d2;
    };

    Mat forward(const Mat& x, const std::vector<unsigned char>& valid, Rng* drop_rng, Cache* cache,
                std::vector<Mat>* probs_out = nullptr) const;
    Mat backward(const Mat& dy, const Cache& cache);
    void params(ParamList& out);
};

class TransformerModel : public NeuralNet {
public:
    explicit TransformerModel(const TransformerConfig& config);

    ParamList params() override;
    std::array<double, 2> forward_logits(const std::vector<int>& ids, Rng* dropout_rng) override;
    void backward_logits(const std::array<double, 2>& dlogits) override;
    std::array<double, 2> infer_logits(const std::vector<int>& ids) const override;
    std::string arch() const override { return cfg_.disentangled ? "deberta" : "transformer"; }

    const TransformerConfig& config() const { return cfg_; }

    // Attention probabilities per layer, per head (inference pass).
    std::vector<std::vector<Mat>> attention_probs(const std::vector<int>& ids) const;

    // One MLM training example: ids with corruptions applied, targets holding
    // the original id at predicted positions and -1 elsewhere. Returns the
    // summed cross-entropy over targets; when backprop is set, gradients are
    // accumulated with the given scale applied to the per-target dlogits.
    double mlm_step(const std::vector<int>& ids, const std::vector<int>& targets, Rng* dropout_rng,
                    bool backprop, double grad_scale);

    // One NSP example over a pre-joined pair sequence. label: 1 = consecutive.
    double nsp_step(const std::vector<int>& ids, int label, Rng* dropout_rng, bool backprop,
                    double grad_scale);

    friend class ModelCodec;

private:
    struct TrunkCache {
        Embedding::Cache emb;
        std::vector<EncoderLayer::Cache> layers;
        std::vector<unsigned char> valid;
        std::size_t n_valid = 0;
    };

    struct ClsCache {
        TrunkCache trunk;
        Linear::Cache head;
    };

    Mat encode(const std::vector<int>& ids, Rng* drop_rng, TrunkCache* cache,
               std::vector<std::vector<Mat>>* probs_out = nullptr) const;
    void trunk_backward(const Mat& dx_top, TrunkCache& cache);
    std::array<double, 2> pooled_logits(const std::vector<int>& ids, Rng* drop_rng,
                                        ClsCache* cache, const Linear& head) const;

    TransformerConfig cfg_;
    Embedding emb_;
    Tensor pos_emb_;  // absolute positions; empty when unused
    std::vector<EncoderLayer> layers_;
    Linear cls_head_;
    Linear mlm_head_;  // present iff cfg_.mlm_head
    Linear nsp_head_;  // present iff cfg_.nsp_head
    ClsCache cls_cache_;
    bool has_pos_emb_ = false;
};

}  // namespace newsbench
