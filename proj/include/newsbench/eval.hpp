#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "newsbench/classifier.hpp"
#include "newsbench/corpus.hpp"

namespace newsbench {

// Counts relative to the designated positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Per-class metrics plus their unweighted mean. Precision, recall and f1
// are defined as 0.0 whenever their denominator is 0; accuracy is overall
// accuracy and identical for both classes.
struct MetricSet {
    ClassMetrics positive;
    ClassMetrics negative;
    ClassMetrics macro;
};

struct EvaluationReport {
    LabelSpace label_space = LabelSpace::veracity();
    ConfusionMatrix confusion;
    MetricSet metric_set;
    // Ordered so rendering is byte-stable.
    std::map<std::string, std::string> metadata;

    const ClassMetrics& for_label(int label) const {
        return label == label_space.positive() ? metric_set.positive : metric_set.negative;
    }
};

struct MetricDelta {
    double two_step = 0.0;
    double one_step = 0.0;
    double delta = 0.0;        // two_step - one_step
    double relative_pct = 0.0; // 100 * delta / one_step, 0 when one_step == 0
};

struct ComparisonReport {
    std::string train_set;
    std::string test_set;
    std::string model;
    MetricDelta accuracy;
    MetricDelta precision;
    MetricDelta recall;
    MetricDelta f1;
};

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels,
                          int positive_class);

MetricSet metrics(const ConfusionMatrix& matrix);

// Preprocesses each test document with `stopwords`, predicts with `model`
// and aggregates. Deterministic for any thread count.
EvaluationReport evaluate(const TextClassifier& model, const LabeledCorpus& test,
                          const StopwordList& stopwords, int threads = 1,
                          std::map<std::string, std::string> metadata = {});

// Same mechanics; metadata marks the distribution shift.
EvaluationReport cross_evaluate(const TextClassifier& model, const LabeledCorpus& other,
                                const StopwordList& stopwords, int threads = 1,
                                std::map<std::string, std::string> metadata = {});

// Macro-metric deltas between a one-step and a two-step run over the same
// train/test pair.
ComparisonReport compare_two_step(const EvaluationReport& one_step,
                                  const EvaluationReport& two_step);

}  // namespace newsbench
