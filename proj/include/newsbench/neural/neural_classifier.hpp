#pragma once

#include <memory>
#include <string>

#include "newsbench/classifier.hpp"
#include "newsbench/features.hpp"
#include "newsbench/neural/train.hpp"

namespace newsbench {

struct NeuralClassifierConfig {
    std::string arch = "transformer";  // lstm | transformer | deberta
    std::size_t max_vocab = 20000;
    std::size_t min_df = 2;
    std::size_t max_len = 256;
    // transformer family
    std::size_t d_model = 64;
    std::size_t heads = 2;
    std::size_t layers = 2;
    std::size_t d_ff = 128;
    double dropout = 0.1;
    std::size_t rel_k = 32;
    // lstm
    std::size_t d_emb = 64;
    std::size_t hidden = 64;
    // training
    double val_fraction = 0.1;
    TrainConfig train;
    std::uint64_t seed = 0;
};

// Vocabulary + sequence encoding + a NeuralNet behind the TextClassifier
// contract. fit() carves a stratified validation slice out of the training
// documents for early stopping.
class NeuralTextClassifier : public TextClassifier {
public:
    NeuralTextClassifier(LabelSpace space, NeuralClassifierConfig config);

    const LabelSpace& label_space() const override { return space_; }
    std::string kind() const override { return config_.arch; }
    void fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) override;
    std::array<double, 2> predict_proba(const TokenList& doc) const override;

    const Vocabulary& vocab() const { return vocab_; }
    NeuralNet* net() { return net_.get(); }
    const TrainTrace& trace() const { return trace_; }
    const NeuralClassifierConfig& config() const { return config_; }

    // Encodes a document to model ids: truncated to max_len, never empty
    // (an empty document becomes a single OOV id).
    std::vector<int> encode(const TokenList& doc) const;

    friend class ModelCodec;

private:
    void build_net();

    LabelSpace space_;
    NeuralClassifierConfig config_;
    Vocabulary vocab_;
    std::unique_ptr<NeuralNet> net_;
    TrainTrace trace_;
};

}  // namespace newsbench
