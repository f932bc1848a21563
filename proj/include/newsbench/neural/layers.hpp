#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "newsbench/neural/mat.hpp"
#include "newsbench/neural/tensor.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

// Every block follows the same shape: forward(x, cache) is const and writes
// what backward needs into the caller-owned cache; backward(dy, cache)
// accumulates parameter gradients and returns the input gradient. Passing a
// null cache runs inference without bookkeeping.

struct Linear {
    Tensor w;  // out × in
    Tensor b;  // out

    Linear() = default;
    Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);

    struct Cache {
        Mat x;
    };

    Mat forward(const Mat& x, Cache* cache) const;
    Mat backward(const Mat& dy, const Cache& cache);
    void params(ParamList& out);

    std::size_t in_dim() const { return w.cols; }
    std::size_t out_dim() const { return w.rows; }
};

struct LayerNorm {
    Tensor gamma;
    Tensor beta;
    double eps = 1e-5;

    LayerNorm() = default;
    LayerNorm(const std::string& name, std::size_t dim);

    struct Cache {
        Mat xhat;
        std::vector<double> inv_std;
    };

    Mat forward(const Mat& x, Cache* cache) const;
    Mat backward(const Mat& dy, const Cache& cache);
    void params(ParamList& out);
};

// Exact GELU (erf form), smooth enough for finite-difference checks.
double gelu(double x);
double gelu_grad(double x);

struct Ffn {
    Linear lin1;  // d -> hidden
    Linear lin2;  // hidden -> d

    Ffn() = default;
    Ffn(const std::string& name, std::size_t d, std::size_t hidden, Rng& rng);

    struct Cache {
        Linear::Cache c1;
        Linear::Cache c2;
        Mat pre;  // pre-activation
    };

    Mat forward(const Mat& x, Cache* cache) const;
    Mat backward(const Mat& dy, const Cache& cache);
    void params(ParamList& out);
};

struct Embedding {
    Tensor table;  // vocab × dim

    Embedding() = default;
    Embedding(const std::string& name, std::size_t vocab, std::size_t dim, Rng& rng);

    struct Cache {
        std::vector<int> ids;
    };

    Mat forward(const std::vector<int>& ids, Cache* cache) const;
    void backward(const Mat& dy, const Cache& cache);
    void params(ParamList& out);

    std::size_t vocab() const { return table.rows; }
    std::size_t dim() const { return table.cols; }
};

// Inverted dropout: active only when an rng is supplied; scaling by 1/(1-p)
// keeps the train-time expectation equal to the eval-time value.
struct Dropout {
    double p = 0.0;

    struct Cache {
        std::vector<double> mask;  // empty -> identity pass
    };

    Mat forward(const Mat& x, Rng* rng, Cache* cache) const;
    Mat backward(const Mat& dy, const Cache& cache) const;
};

}  // namespace newsbench
