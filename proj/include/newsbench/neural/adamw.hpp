#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "newsbench/neural/tensor.hpp"

namespace newsbench {

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

// AdamW with bias-corrected moments and decoupled weight decay: the decay
// w <- w - lr*wd*w is applied separately from the gradient-driven update.
class AdamW {
public:
    explicit AdamW(AdamWConfig config);

    void step(const ParamList& params);
    std::uint64_t steps() const { return t_; }
    const AdamWConfig& config() const { return config_; }

private:
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };

    AdamWConfig config_;
    std::uint64_t t_ = 0;
    std::map<std::string, Moments> state_;
};

}  // namespace newsbench
