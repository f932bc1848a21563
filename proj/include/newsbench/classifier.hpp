#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "newsbench/corpus.hpp"
#include "newsbench/preprocess.hpp"

namespace newsbench {

// Shared contract: anything that fits on a labelled corpus of clean token
// lists and returns a probability distribution over its two labels.
class TextClassifier {
public:
    virtual ~TextClassifier() = default;

    virtual const LabelSpace& label_space() const = 0;
    virtual std::string kind() const = 0;

    virtual void fit(const std::vector<TokenList>& docs, const std::vector<int>& labels) = 0;

    // Probabilities indexed by label; in [0,1] and summing to 1.
    virtual std::array<double, 2> predict_proba(const TokenList& doc) const = 0;

    // Argmax with ties broken toward the negative class.
    int predict(const TokenList& doc) const {
        auto p = predict_proba(doc);
        int pos = label_space().positive();
        int neg = label_space().negative();
        return p[pos] > p[neg] ? pos : neg;
    }
};

}  // namespace newsbench
