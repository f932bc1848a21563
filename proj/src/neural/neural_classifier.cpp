#include "newsbench/neural/neural_classifier.hpp"

#include <algorithm>

#include "newsbench/errors.hpp"
#include "newsbench/neural/loss.hpp"
#include "newsbench/neural/lstm.hpp"
#include "newsbench/neural/transformer.hpp"

namespace newsbench {

NeuralTextClassifier::NeuralTextClassifier(LabelSpace space, NeuralClassifierConfig config)
    : space_(std::move(space)), config_(std::move(config)) {
    if (config_.arch != "lstm" && config_.arch != "transformer" && config_.arch != "deberta") {
        throw ConfigError("unknown neural arch '" + config_.arch + "'");
    }
    if (config_.val_fraction <= 0.0 || config_.val_fraction >= 0.5) {
        throw ConfigError("val_fraction must be in (0, 0.5)");
    }
}

std::vector<int> NeuralTextClassifier::encode(const TokenList& doc) const {
    std::vector<int> ids;
    ids.reserve(std::min(doc.size(), config_.max_len));
    for (const std::string& token : doc) {
        if (ids.size() == config_.max_len) break;
        const int index = vocab_.index_of(token);
        ids.push_back(index < 0 ? kOovId : index + kSequenceIdOffset);
    }
    if (ids.empty()) ids.push_back(kOovId);
    return ids;
}

void NeuralTextClassifier::build_net() {
    if (config_.arch == "lstm") {
        LstmConfig lstm;
        lstm.vocab = vocab_.size() + kSequenceIdOffset;
        lstm.d_emb = config_.d_emb;
        lstm.hidden = config_.hidden;
        lstm.seed = derive_seed(config_.seed, "model");
        net_ = std::make_unique<LstmModel>(lstm);
        return;
    }
    TransformerConfig tf;
    tf.vocab = model_vocab_rows(vocab_.size());
    tf.d_model = config_.d_model;
    tf.heads = config_.heads;
    tf.layers = config_.layers;
    tf.d_ff = config_.d_ff;
    tf.max_len = config_.max_len;
    tf.dropout = config_.dropout;
    tf.disentangled = config_.arch == "deberta";
    tf.rel_k = config_.rel_k;
    tf.seed = derive_seed(config_.seed, "model");
    net_ = std::make_unique<TransformerModel>(tf);
}

void NeuralTextClassifier::fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) {
    if (docs.size() != labels.size()) throw TrainError("feature/label count mismatch");
    if (docs.empty()) throw TrainError("empty training set");

    vocab_ = build_vocab(docs, config_.max_vocab, config_.min_df);
    build_net();

    // Stratified validation carve-out: per class, shuffle then hold out
    // roughly val_fraction, always leaving at least one training example.
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw TrainError("label out of range");
        by_class[labels[i]].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) {
        throw TrainError("training set contains a single class");
    }

    Rng split_rng(derive_seed(config_.seed, "val-split"));
    std::vector<std::vector<int>> train_ids, val_ids;
    std::vector<int> train_labels, val_labels;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t>& members = by_class[c];
        split_rng.shuffle(members);
        std::size_t held = static_cast<std::size_t>(
            config_.val_fraction * static_cast<double>(members.size()));
        held = std::min(held, members.size() - 1);
        if (held == 0 && members.size() >= 2) held = 1;
        for (std::size_t k = 0; k < members.size(); ++k) {
            const std::size_t i = members[k];
            if (k < held) {
                val_ids.push_back(encode(docs[i]));
                val_labels.push_back(c);
            } else {
                train_ids.push_back(encode(docs[i]));
                train_labels.push_back(c);
            }
        }
    }
    if (val_ids.empty()) {
        // Degenerate corpus (one example per class): validate on train.
        val_ids = train_ids;
        val_labels = train_labels;
    }

    TrainConfig train = config_.train;
    train.seed = derive_seed(config_.seed, "train");
    trace_ = train_classifier(*net_, train_ids, train_labels, val_ids, val_labels, train);
}

std::array<double, 2> NeuralTextClassifier::predict_proba(const TokenList& doc) const {
    if (!net_) throw TrainError("classifier not fitted");
    return softmax2(net_->infer_logits(encode(doc)));
}

}  // namespace newsbench
