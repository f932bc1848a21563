#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "newsbench/neural/layers.hpp"
#include "newsbench/neural/net.hpp"

namespace newsbench {

struct LstmConfig {
    std::size_t vocab = 0;  // embedding rows (pad + oov + tokens)
    std::size_t d_emb = 64;
    std::size_t hidden = 64;
    std::uint64_t seed = 0;
};

// Single-layer LSTM classifier: embedding, one recurrent pass over the
// non-pad prefix, dense head on the final hidden state. Gate rows in wx/wh/b
// are ordered input, forget, cell, output.
class LstmModel : public NeuralNet {
public:
    explicit LstmModel(const LstmConfig& config);

    ParamList params() override;
    std::array<double, 2> forward_logits(const std::vector<int>& ids, Rng* dropout_rng) override;
    void backward_logits(const std::array<double, 2>& dlogits) override;
    std::array<double, 2> infer_logits(const std::vector<int>& ids) const override;
    std::string arch() const override { return "lstm"; }

    const LstmConfig& config() const { return cfg_; }
    Embedding& embedding() { return emb_; }

    friend class ModelCodec;

private:
    struct Cache {
        std::vector<int> ids;  // trimmed to the non-pad prefix
        Mat x;                 // L × d_emb
        Mat gate_i, gate_f, gate_g, gate_o;
        Mat cell, tanh_cell, hidden;
        Linear::Cache head;
    };

    std::array<double, 2> run(const std::vector<int>& ids, Cache* cache) const;
    void step(const double* x, const double* h_prev, double* zi, double* zf, double* zg,
              double* zo) const;

    LstmConfig cfg_;
    Embedding emb_;
    Tensor wx_;  // 4H × d_emb
    Tensor wh_;  // 4H × H
    Tensor b_;   // 4H
    Linear head_;
    Cache cache_;
};

}  // namespace newsbench
