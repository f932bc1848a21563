#pragma once

#include <memory>
#include <string>

#include "newsbench/baselines.hpp"
#include "newsbench/neural/neural_classifier.hpp"

namespace newsbench {

// One bag of settings covering every classifier kind; only the block matching
// `kind` is read. Seeds for the chosen model are derived from `seed`.
struct ClassifierSpec {
    std::string kind = "logreg";  // logreg | nb | forest | lstm | transformer | deberta
    FeatureConfig features;
    LogRegConfig logreg;
    double nb_alpha = 1.0;
    ForestConfig forest;
    NeuralClassifierConfig neural;
    std::uint64_t seed = 0;
    int threads = 1;
};

bool is_neural_kind(const std::string& kind);

std::unique_ptr<TextClassifier> make_classifier(const ClassifierSpec& spec, LabelSpace space);

}  // namespace newsbench
