#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "newsbench/neural/layers.hpp"
#include "newsbench/neural/mat.hpp"
#include "newsbench/neural/tensor.hpp"

namespace newsbench {

struct AttentionConfig {
    std::size_t d_model = 64;
    std::size_t heads = 2;
    bool disentangled = false;
    std::size_t rel_k = 32;  // relative distances clipped to [-k, k); table has 2k rows
};

// Multi-head self-attention over one sequence. Standard variant scores
// softmax(QK^T / sqrt(d_head)); disentangled variant adds content-to-position
// and position-to-content terms over a relative-position embedding table and
// scales by 1/sqrt(3*d_head). Padded key positions get probability exactly 0.
struct MultiHeadAttention {
    AttentionConfig cfg;
    Linear wq, wk, wv, wo;
    Tensor rel_emb;  // 2k × d_model; unused (empty) in the standard variant

    MultiHeadAttention() = default;
    MultiHeadAttention(const std::string& name, const AttentionConfig& config, Rng& rng);

    struct Cache {
        Linear::Cache cq, ck, cv, co;
        Mat q, k, v;
        std::vector<Mat> probs;  // one T×T matrix per head
        std::vector<unsigned char> valid;
    };

    // valid[j] == 0 marks a padded position; such keys receive zero
    // probability. Throws DataError when no position is valid.
    Mat forward(const Mat& x, const std::vector<unsigned char>& valid, Cache* cache,
                std::vector<Mat>* probs_out = nullptr) const;
    Mat backward(const Mat& dy, const Cache& cache);
    void params(ParamList& out);

    std::size_t d_head() const { return cfg.d_model / cfg.heads; }
    // DeBERTa-style bucket for the relative distance i-j, in [0, 2k).
    std::size_t rel_bucket(std::size_t i, std::size_t j) const;
};

}  // namespace newsbench
