#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "newsbench/classifier.hpp"
#include "newsbench/features.hpp"

namespace newsbench {

// ---------------------------------------------------------------------------
// Logistic regression: full-batch gradient descent on L2-regularized
// cross-entropy. Weights start at zero, so training is deterministic.
// ---------------------------------------------------------------------------

struct LogRegConfig {
    double lr = 0.1;
    std::size_t epochs = 200;
    double l2_lambda = 1e-4;
    std::uint64_t seed = 0;
};

class LogRegModel {
public:
    std::array<double, 2> predict_proba(const SparseVector& x) const;
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }
    double l2_lambda() const { return l2_lambda_; }

    friend LogRegModel train_logreg(const std::vector<SparseVector>&, const std::vector<int>&,
                                    const LogRegConfig&);
    friend class ModelCodec;

private:
    std::vector<double> weights_;
    double bias_ = 0.0;
    double l2_lambda_ = 0.0;
    std::vector<double> loss_trace_;
};

// Mean cross-entropy plus (l2/2)*|w|^2 and its gradient; exposed so tests
// can check the analytic gradient against finite differences.
double logreg_loss_and_grad(const std::vector<SparseVector>& x, const std::vector<int>& y,
                            const std::vector<double>& weights, double bias, double l2_lambda,
                            std::vector<double>& grad_w, double& grad_b);

LogRegModel train_logreg(const std::vector<SparseVector>& x, const std::vector<int>& y,
                         const LogRegConfig& config);

// ---------------------------------------------------------------------------
// Multinomial naive Bayes with Laplace smoothing:
//   P(t|c) = (count(t,c) + alpha) / (sum_t count(t,c) + alpha * |V|)
// Expects raw count vectors.
// ---------------------------------------------------------------------------

class NaiveBayesModel {
public:
    std::array<double, 2> predict_proba(const SparseVector& x) const;
    double log_prior(int label) const { return log_prior_[label]; }
    double log_likelihood(std::size_t token, int label) const {
        return log_likelihood_[label][token];
    }
    double alpha() const { return alpha_; }

    friend NaiveBayesModel train_nb(const std::vector<SparseVector>&, const std::vector<int>&, double);
    friend class ModelCodec;

private:
    std::array<double, 2> log_prior_ = {0.0, 0.0};
    std::array<std::vector<double>, 2> log_likelihood_;
    double alpha_ = 1.0;
};

NaiveBayesModel train_nb(const std::vector<SparseVector>& x, const std::vector<int>& y, double alpha);

// ---------------------------------------------------------------------------
// Random forest of axis-aligned Gini trees. Each tree trains on a bootstrap
// sample; each node considers a random feature subset. Per-tree seeds are
// derive_seed(master_seed, tree_index), so parallel and sequential training
// build identical forests.
// ---------------------------------------------------------------------------

struct ForestConfig {
    std::size_t trees = 100;
    double feature_fraction = 0.0;  // 0 -> sqrt(|V|)/|V|
    std::size_t max_depth = 40;     // 0 -> unlimited
    std::size_t min_split = 2;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TreeNode {
    std::uint32_t feature = 0;
    double threshold = 0.0;   // value > threshold goes right
    std::int32_t left = -1;   // -1 on leaves
    std::int32_t right = -1;
    std::int32_t leaf_label = -1;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    int predict(const SparseVector& x) const;
};

class RandomForestModel {
public:
    // Probability = vote fraction per label.
    std::array<double, 2> predict_proba(const SparseVector& x) const;
    const std::vector<DecisionTree>& trees() const { return trees_; }

    friend RandomForestModel train_forest(const std::vector<SparseVector>&, const std::vector<int>&,
                                          const ForestConfig&);
    friend class ModelCodec;

private:
    std::vector<DecisionTree> trees_;
};

RandomForestModel train_forest(const std::vector<SparseVector>& x, const std::vector<int>& y,
                               const ForestConfig& config);

// ---------------------------------------------------------------------------
// Document-level wrappers: vocabulary + features + model behind the shared
// TextClassifier contract.
// ---------------------------------------------------------------------------

struct FeatureConfig {
    std::size_t max_vocab = 50000;
    std::size_t min_df = 2;
};

class TfidfLogRegClassifier : public TextClassifier {
public:
    TfidfLogRegClassifier(LabelSpace space, FeatureConfig features = {}, LogRegConfig config = {})
        : space_(std::move(space)), features_(features), config_(config) {}

    const LabelSpace& label_space() const override { return space_; }
    std::string kind() const override { return "logreg"; }
    void fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) override;
    std::array<double, 2> predict_proba(const TokenList& doc) const override;

    const LogRegModel& model() const { return model_; }
    const TfidfModel& tfidf() const { return tfidf_; }

    friend class ModelCodec;

private:
    LabelSpace space_;
    FeatureConfig features_;
    LogRegConfig config_;
    TfidfModel tfidf_;
    LogRegModel model_;
};

class NaiveBayesClassifier : public TextClassifier {
public:
    NaiveBayesClassifier(LabelSpace space, FeatureConfig features = {}, double alpha = 1.0)
        : space_(std::move(space)), features_(features), alpha_(alpha) {}

    const LabelSpace& label_space() const override { return space_; }
    std::string kind() const override { return "nb"; }
    void fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) override;
    std::array<double, 2> predict_proba(const TokenList& doc) const override;

    const NaiveBayesModel& model() const { return model_; }

    friend class ModelCodec;

private:
    LabelSpace space_;
    FeatureConfig features_;
    double alpha_;
    Vocabulary vocab_;
    NaiveBayesModel model_;
};

class TfidfForestClassifier : public TextClassifier {
public:
    TfidfForestClassifier(LabelSpace space, FeatureConfig features = {}, ForestConfig config = {})
        : space_(std::move(space)), features_(features), config_(config) {}

    const LabelSpace& label_space() const override { return space_; }
    std::string kind() const override { return "forest"; }
    void fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) override;
    std::array<double, 2> predict_proba(const TokenList& doc) const override;

    const RandomForestModel& model() const { return model_; }

    friend class ModelCodec;

private:
    LabelSpace space_;
    FeatureConfig features_;
    ForestConfig config_;
    TfidfModel tfidf_;
    RandomForestModel model_;
};

}  // namespace newsbench
