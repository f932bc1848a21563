#include "newsbench/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "newsbench/errors.hpp"
#include "newsbench/parallel.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

namespace {

void check_training_set(const std::vector<SparseVector>& x, const std::vector<int>& y) {
    if (x.empty()) throw TrainError("empty training set");
    if (x.size() != y.size()) throw TrainError("feature/label count mismatch");
    int seen[2] = {0, 0};
    for (int label : y) {
        if (label != 0 && label != 1) throw TrainError("label out of range");
        seen[label] = 1;
    }
    if (!seen[0] || !seen[1]) throw TrainError("training set contains a single class");
    for (const SparseVector& row : x) {
        if (row.dim() != x.front().dim()) throw TrainError("inconsistent feature dimensions");
    }
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(sigmoid(z)) without overflow for large |z|.
double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

double sparse_value(const SparseVector& x, std::uint32_t feature) {
    const auto& entries = x.entries();
    auto it = std::lower_bound(entries.begin(), entries.end(), feature,
                               [](const std::pair<std::uint32_t, double>& e, std::uint32_t f) {
                                   return e.first < f;
                               });
    if (it == entries.end() || it->first != feature) return 0.0;
    return it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

double logreg_loss_and_grad(const std::vector<SparseVector>& x, const std::vector<int>& y,
                            const std::vector<double>& weights, double bias, double l2_lambda,
                            std::vector<double>& grad_w, double& grad_b) {
    const std::size_t n = x.size();
    grad_w.assign(weights.size(), 0.0);
    grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = bias;
        for (const auto& [idx, wgt] : x[i].entries()) z += weights[idx] * wgt;
        // y=1: -log(sigma(z)); y=0: -log(1-sigma(z)) = -log(sigma(-z))
        loss -= (y[i] == 1) ? log_sigmoid(z) : log_sigmoid(-z);
        const double err = sigmoid(z) - static_cast<double>(y[i]);
        for (const auto& [idx, wgt] : x[i].entries()) grad_w[idx] += err * wgt;
        grad_b += err;
    }
    loss /= static_cast<double>(n);
    grad_b /= static_cast<double>(n);
    double penalty = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        grad_w[j] = grad_w[j] / static_cast<double>(n) + l2_lambda * weights[j];
        penalty += weights[j] * weights[j];
    }
    return loss + 0.5 * l2_lambda * penalty;
}

LogRegModel train_logreg(const std::vector<SparseVector>& x, const std::vector<int>& y,
                         const LogRegConfig& config) {
    check_training_set(x, y);
    if (config.lr <= 0.0) throw ConfigError("logreg lr must be positive");
    if (config.l2_lambda < 0.0) throw ConfigError("logreg l2_lambda must be non-negative");

    LogRegModel model;
    model.weights_.assign(x.front().dim(), 0.0);
    model.bias_ = 0.0;
    model.l2_lambda_ = config.l2_lambda;
    model.loss_trace_.reserve(config.epochs);

    std::vector<double> grad_w;
    double grad_b = 0.0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss = logreg_loss_and_grad(x, y, model.weights_, model.bias_,
                                                 config.l2_lambda, grad_w, grad_b);
        model.loss_trace_.push_back(loss);
        for (std::size_t j = 0; j < model.weights_.size(); ++j) {
            model.weights_[j] -= config.lr * grad_w[j];
        }
        model.bias_ -= config.lr * grad_b;
    }
    return model;
}

std::array<double, 2> LogRegModel::predict_proba(const SparseVector& x) const {
    if (x.dim() != weights_.size()) throw DataError("feature dimension mismatch in logreg predict");
    double z = bias_;
    for (const auto& [idx, wgt] : x.entries()) z += weights_[idx] * wgt;
    const double p1 = sigmoid(z);
    return {1.0 - p1, p1};
}

// ---------------------------------------------------------------------------
// Naive Bayes
// ---------------------------------------------------------------------------

NaiveBayesModel train_nb(const std::vector<SparseVector>& x, const std::vector<int>& y,
                         double alpha) {
    check_training_set(x, y);
    if (alpha <= 0.0) throw ConfigError("nb alpha must be positive");

    const std::size_t vocab = x.front().dim();
    if (vocab == 0) throw TrainError("empty vocabulary in nb training");

    std::array<std::vector<double>, 2> counts;
    counts[0].assign(vocab, 0.0);
    counts[1].assign(vocab, 0.0);
    std::array<double, 2> totals = {0.0, 0.0};
    std::array<std::size_t, 2> docs = {0, 0};

    for (std::size_t i = 0; i < x.size(); ++i) {
        const int c = y[i];
        ++docs[c];
        for (const auto& [idx, wgt] : x[i].entries()) {
            counts[c][idx] += wgt;
            totals[c] += wgt;
        }
    }

    NaiveBayesModel model;
    model.alpha_ = alpha;
    for (int c = 0; c < 2; ++c) {
        model.log_prior_[c] =
            std::log(static_cast<double>(docs[c]) / static_cast<double>(x.size()));
        model.log_likelihood_[c].resize(vocab);
        const double denom = totals[c] + alpha * static_cast<double>(vocab);
        for (std::size_t t = 0; t < vocab; ++t) {
            model.log_likelihood_[c][t] = std::log((counts[c][t] + alpha) / denom);
        }
    }
    return model;
}

std::array<double, 2> NaiveBayesModel::predict_proba(const SparseVector& x) const {
    if (x.dim() != log_likelihood_[0].size()) {
        throw DataError("feature dimension mismatch in nb predict");
    }
    std::array<double, 2> score = {log_prior_[0], log_prior_[1]};
    for (const auto& [idx, wgt] : x.entries()) {
        score[0] += wgt * log_likelihood_[0][idx];
        score[1] += wgt * log_likelihood_[1][idx];
    }
    const double m = std::max(score[0], score[1]);
    const double e0 = std::exp(score[0] - m);
    const double e1 = std::exp(score[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
    const std::vector<SparseVector>& x;
    const std::vector<int>& y;
    std::size_t vocab;
    std::size_t max_depth;
    std::size_t min_split;
    std::size_t feature_count;  // features sampled per node
    Rng rng;
    std::vector<TreeNode> nodes;

    // feature -> slot in the per-node candidate table, SIZE_MAX if unsampled
    std::vector<std::size_t> feature_slot;

    TreeBuilder(const std::vector<SparseVector>& x_, const std::vector<int>& y_,
                std::size_t vocab_, const ForestConfig& config, std::uint64_t tree_seed)
        : x(x_), y(y_), vocab(vocab_), max_depth(config.max_depth), min_split(config.min_split),
          rng(tree_seed), feature_slot(vocab_, SIZE_MAX) {
        double fraction = config.feature_fraction;
        if (fraction <= 0.0) {
            fraction = std::sqrt(static_cast<double>(vocab)) / static_cast<double>(vocab);
        }
        feature_count = static_cast<std::size_t>(
            std::max(1.0, std::round(fraction * static_cast<double>(vocab))));
        feature_count = std::min(feature_count, vocab);
    }

    static double gini(const std::array<std::size_t, 2>& c) {
        const double n = static_cast<double>(c[0] + c[1]);
        if (n == 0.0) return 0.0;
        const double p0 = static_cast<double>(c[0]) / n;
        const double p1 = static_cast<double>(c[1]) / n;
        return 1.0 - p0 * p0 - p1 * p1;
    }

    static int majority(const std::array<std::size_t, 2>& c) { return c[1] > c[0] ? 1 : 0; }

    // Sample feature_count distinct features (Floyd), in draw order.
    std::vector<std::uint32_t> sample_features() {
        std::vector<std::uint32_t> sampled;
        sampled.reserve(feature_count);
        for (std::size_t j = vocab - feature_count; j < vocab; ++j) {
            auto candidate = static_cast<std::uint32_t>(rng.next_below(j + 1));
            if (std::find(sampled.begin(), sampled.end(), candidate) != sampled.end()) {
                candidate = static_cast<std::uint32_t>(j);
            }
            sampled.push_back(candidate);
        }
        return sampled;
    }

    std::int32_t build(std::vector<std::uint32_t>& samples, std::size_t depth) {
        std::array<std::size_t, 2> counts = {0, 0};
        for (std::uint32_t i : samples) ++counts[static_cast<std::size_t>(y[i])];

        const auto id = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();

        const bool depth_capped = max_depth != 0 && depth >= max_depth;
        if (counts[0] == 0 || counts[1] == 0 || samples.size() < min_split || depth_capped) {
            nodes[id].leaf_label = majority(counts);
            return id;
        }

        std::vector<std::uint32_t> sampled = sample_features();
        for (std::size_t s = 0; s < sampled.size(); ++s) feature_slot[sampled[s]] = s;

        // Per-slot (value, label) pairs for samples where the feature is nonzero.
        std::vector<std::vector<std::pair<double, int>>> present(sampled.size());
        for (std::uint32_t i : samples) {
            for (const auto& [idx, wgt] : x[i].entries()) {
                const std::size_t slot = feature_slot[idx];
                if (slot != SIZE_MAX) present[slot].push_back({wgt, y[i]});
            }
        }
        for (std::uint32_t f : sampled) feature_slot[f] = SIZE_MAX;

        double best_gini = gini(counts);  // must strictly improve on the parent
        std::uint32_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;
        const double total = static_cast<double>(samples.size());

        for (std::size_t s = 0; s < sampled.size(); ++s) {
            auto& vals = present[s];
            std::sort(vals.begin(), vals.end());
            std::array<std::size_t, 2> nonzero = {0, 0};
            for (const auto& [v, label] : vals) ++nonzero[static_cast<std::size_t>(label)];
            // Samples lacking the feature contribute value 0; counts and
            // tf-idf weights are never negative, so zeros sort first.
            std::array<std::size_t, 2> zeros = {counts[0] - nonzero[0], counts[1] - nonzero[1]};
            const std::size_t zero_n = zeros[0] + zeros[1];

            std::array<std::size_t, 2> left = {0, 0};
            double prev = 0.0;
            bool have_prev = false;
            if (zero_n > 0) {
                left[0] += zeros[0];
                left[1] += zeros[1];
                have_prev = true;
            }
            std::size_t k = 0;
            while (k < vals.size()) {
                const double v = vals[k].first;
                if (have_prev && v > prev) {
                    std::array<std::size_t, 2> right = {counts[0] - left[0], counts[1] - left[1]};
                    const double ln = static_cast<double>(left[0] + left[1]);
                    const double rn = static_cast<double>(right[0] + right[1]);
                    const double weighted = (ln / total) * gini(left) + (rn / total) * gini(right);
                    if (weighted < best_gini - 1e-12) {
                        best_gini = weighted;
                        best_feature = sampled[s];
                        best_threshold = 0.5 * (prev + v);
                        found = true;
                    }
                }
                while (k < vals.size() && vals[k].first == v) {
                    ++left[static_cast<std::size_t>(vals[k].second)];
                    ++k;
                }
                prev = v;
                have_prev = true;
            }
        }

        if (!found) {
            nodes[id].leaf_label = majority(counts);
            return id;
        }

        std::vector<std::uint32_t> left_samples, right_samples;
        for (std::uint32_t i : samples) {
            if (sparse_value(x[i], best_feature) > best_threshold) {
                right_samples.push_back(i);
            } else {
                left_samples.push_back(i);
            }
        }
        samples.clear();
        samples.shrink_to_fit();

        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        const std::int32_t left_id = build(left_samples, depth + 1);
        nodes[id].left = left_id;
        const std::int32_t right_id = build(right_samples, depth + 1);
        nodes[id].right = right_id;
        return id;
    }
};

}  // namespace

int DecisionTree::predict(const SparseVector& x) const {
    std::int32_t node = 0;
    while (nodes[node].leaf_label < 0) {
        const TreeNode& n = nodes[node];
        node = sparse_value(x, n.feature) > n.threshold ? n.right : n.left;
    }
    return nodes[node].leaf_label;
}

RandomForestModel train_forest(const std::vector<SparseVector>& x, const std::vector<int>& y,
                               const ForestConfig& config) {
    check_training_set(x, y);
    if (config.trees == 0) throw ConfigError("forest needs at least one tree");
    if (config.feature_fraction < 0.0 || config.feature_fraction > 1.0) {
        throw ConfigError("forest feature_fraction must be in [0, 1]");
    }

    const std::size_t vocab = x.front().dim();
    if (vocab == 0) throw TrainError("empty vocabulary in forest training");

    RandomForestModel model;
    model.trees_.resize(config.trees);
    parallel_for(config.trees, config.threads, [&](std::size_t t) {
        TreeBuilder builder(x, y, vocab, config, derive_seed(config.seed, t));
        std::vector<std::uint32_t> bootstrap(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            bootstrap[i] = static_cast<std::uint32_t>(builder.rng.next_below(x.size()));
        }
        builder.build(bootstrap, 0);
        model.trees_[t].nodes = std::move(builder.nodes);
    });
    return model;
}

std::array<double, 2> RandomForestModel::predict_proba(const SparseVector& x) const {
    std::array<std::size_t, 2> votes = {0, 0};
    for (const DecisionTree& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(x))];
    const double n = static_cast<double>(trees_.size());
    return {static_cast<double>(votes[0]) / n, static_cast<double>(votes[1]) / n};
}

// ---------------------------------------------------------------------------
// Document-level wrappers
// ---------------------------------------------------------------------------

namespace {

void check_labels(const std::vector<TokenList>& docs, const std::vector<int>& labels) {
    if (docs.size() != labels.size()) throw TrainError("feature/label count mismatch");
    if (docs.empty()) throw TrainError("empty training set");
}

}  // namespace

void TfidfLogRegClassifier::fit(const std::vector<TokenList>& docs,
                                const std::vector<int>& labels) {
    check_labels(docs, labels);
    tfidf_ = fit_tfidf(docs, build_vocab(docs, features_.max_vocab, features_.min_df));
    std::vector<SparseVector> rows;
    rows.reserve(docs.size());
    for (const TokenList& doc : docs) rows.push_back(tfidf_transform(doc, tfidf_));
    model_ = train_logreg(rows, labels, config_);
}

std::array<double, 2> TfidfLogRegClassifier::predict_proba(const TokenList& doc) const {
    return model_.predict_proba(tfidf_transform(doc, tfidf_));
}

void NaiveBayesClassifier::fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) {
    check_labels(docs, labels);
    vocab_ = build_vocab(docs, features_.max_vocab, features_.min_df);
    std::vector<SparseVector> rows;
    rows.reserve(docs.size());
    for (const TokenList& doc : docs) rows.push_back(count_vector(doc, vocab_));
    model_ = train_nb(rows, labels, alpha_);
}

std::array<double, 2> NaiveBayesClassifier::predict_proba(const TokenList& doc) const {
    return model_.predict_proba(count_vector(doc, vocab_));
}

void TfidfForestClassifier::fit(const std::vector<TokenList>& docs,
                                const std::vector<int>& labels) {
    check_labels(docs, labels);
    tfidf_ = fit_tfidf(docs, build_vocab(docs, features_.max_vocab, features_.min_df));
    std::vector<SparseVector> rows;
    rows.reserve(docs.size());
    for (const TokenList& doc : docs) rows.push_back(tfidf_transform(doc, tfidf_));
    model_ = train_forest(rows, labels, config_);
}

std::array<double, 2> TfidfForestClassifier::predict_proba(const TokenList& doc) const {
    return model_.predict_proba(tfidf_transform(doc, tfidf_));
}

}  // namespace newsbench
