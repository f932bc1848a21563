#pragma once

#include <array>
#include <string>
#include <vector>

#include "newsbench/neural/tensor.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

// Shared surface for trainable sequence classifiers. forward_logits keeps an
// internal cache that the next backward_logits consumes, so the training loop
// is strictly forward-then-backward, single-threaded. infer_logits is pure
// and safe to call from parallel evaluation.
class NeuralNet {
public:
    virtual ~NeuralNet() = default;

    virtual ParamList params() = 0;
    virtual std::array<double, 2> forward_logits(const std::vector<int>& ids, Rng* dropout_rng) = 0;
    virtual void backward_logits(const std::array<double, 2>& dlogits) = 0;
    virtual std::array<double, 2> infer_logits(const std::vector<int>& ids) const = 0;
    virtual std::string arch() const = 0;
};

}  // namespace newsbench
