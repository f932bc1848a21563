#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "newsbench/rng.hpp"

namespace newsbench {

// Named trainable parameter with its gradient accumulator. Names must be
// unique within a model; the optimizer and checkpoint format key on them.
struct Tensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 1;
    std::vector<double> v;
    std::vector<double> g;

    Tensor() = default;
    Tensor(std::string n, std::size_t r, std::size_t c = 1)
        : name(std::move(n)), rows(r), cols(c), v(r * c, 0.0), g(r * c, 0.0) {}

    std::size_t size() const { return v.size(); }
    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
    double& grad_at(std::size_t r, std::size_t c) { return g[r * cols + c]; }

    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }

    void init_gaussian(Rng& rng, double scale) {
        for (double& x : v) x = rng.next_gaussian() * scale;
    }

    void fill(double value) { std::fill(v.begin(), v.end(), value); }
};

using ParamList = std::vector<Tensor*>;

inline void zero_grads(const ParamList& params) {
    for (Tensor* p : params) p->zero_grad();
}

inline std::size_t param_count(const ParamList& params) {
    std::size_t n = 0;
    for (const Tensor* p : params) n += p->size();
    return n;
}

inline void scale_grads(const ParamList& params, double s) {
    for (Tensor* p : params) {
        for (double& g : p->g) g *= s;
    }
}

}  // namespace newsbench
