#include "newsbench/neural/layers.hpp"

#include <cmath>

#include "newsbench/errors.hpp"

namespace newsbench {

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : w(name + ".w", out, in), b(name + ".b", out) {
    w.init_gaussian(rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

Mat Linear::forward(const Mat& x, Cache* cache) const {
    if (x.cols != w.cols) throw TrainError("linear '" + w.name + "' input dim mismatch");
    Mat y(x.rows, w.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xrow = x.row(i);
        double* yrow = y.row(i);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double* wrow = w.v.data() + o * w.cols;
            double s = b.v[o];
            for (std::size_t k = 0; k < w.cols; ++k) s += wrow[k] * xrow[k];
            yrow[o] = s;
        }
    }
    if (cache) cache->x = x;
    return y;
}

Mat Linear::backward(const Mat& dy, const Cache& cache) {
    const Mat& x = cache.x;
    Mat dx(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* dyrow = dy.row(i);
        const double* xrow = x.row(i);
        double* dxrow = dx.row(i);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double d = dyrow[o];
            if (d == 0.0) continue;
            const double* wrow = w.v.data() + o * w.cols;
            double* gwrow = w.g.data() + o * w.cols;
            for (std::size_t k = 0; k < w.cols; ++k) {
                dxrow[k] += d * wrow[k];
                gwrow[k] += d * xrow[k];
            }
            b.g[o] += d;
        }
    }
    return dx;
}

void Linear::params(ParamList& out) {
    out.push_back(&w);
    out.push_back(&b);
}

// ---------------------------------------------------------------------------
// LayerNorm
// ---------------------------------------------------------------------------

LayerNorm::LayerNorm(const std::string& name, std::size_t dim)
    : gamma(name + ".gamma", dim), beta(name + ".beta", dim) {
    gamma.fill(1.0);
}

Mat LayerNorm::forward(const Mat& x, Cache* cache) const {
    const std::size_t d = gamma.rows;
    Mat y(x.rows, x.cols);
    if (cache) {
        cache->xhat = Mat(x.rows, x.cols);
        cache->inv_std.assign(x.rows, 0.0);
    }
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xrow = x.row(i);
        double mean = 0.0;
        for (std::size_t k = 0; k < d; ++k) mean += xrow[k];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double c = xrow[k] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        double* yrow = y.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double xh = (xrow[k] - mean) * inv;
            yrow[k] = gamma.v[k] * xh + beta.v[k];
            if (cache) cache->xhat.at(i, k) = xh;
        }
        if (cache) cache->inv_std[i] = inv;
    }
    return y;
}

Mat LayerNorm::backward(const Mat& dy, const Cache& cache) {
    const std::size_t d = gamma.rows;
    Mat dx(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dy.rows; ++i) {
        const double* dyrow = dy.row(i);
        const double* xhrow = cache.xhat.row(i);
        double sum_dxhat = 0.0;
        double sum_dxhat_xhat = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double dxh = dyrow[k] * gamma.v[k];
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xhrow[k];
            gamma.g[k] += dyrow[k] * xhrow[k];
            beta.g[k] += dyrow[k];
        }
        const double inv = cache.inv_std[i];
        const double nd = static_cast<double>(d);
        double* dxrow = dx.row(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double dxh = dyrow[k] * gamma.v[k];
            dxrow[k] = inv * (dxh - sum_dxhat / nd - xhrow[k] * sum_dxhat_xhat / nd);
        }
    }
    return dx;
}

void LayerNorm::params(ParamList& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

// ---------------------------------------------------------------------------
// GELU + FFN
// ---------------------------------------------------------------------------

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return cdf + x * pdf;
}

Ffn::Ffn(const std::string& name, std::size_t d, std::size_t hidden, Rng& rng)
    : lin1(name + ".lin1", d, hidden, rng), lin2(name + ".lin2", hidden, d, rng) {}

Mat Ffn::forward(const Mat& x, Cache* cache) const {
    Mat pre = lin1.forward(x, cache ? &cache->c1 : nullptr);
    Mat act(pre.rows, pre.cols);
    for (std::size_t i = 0; i < pre.a.size(); ++i) act.a[i] = gelu(pre.a[i]);
    if (cache) cache->pre = std::move(pre);
    return lin2.forward(act, cache ? &cache->c2 : nullptr);
}

Mat Ffn::backward(const Mat& dy, const Cache& cache) {
    Mat dact = lin2.backward(dy, cache.c2);
    for (std::size_t i = 0; i < dact.a.size(); ++i) dact.a[i] *= gelu_grad(cache.pre.a[i]);
    return lin1.backward(dact, cache.c1);
}

void Ffn::params(ParamList& out) {
    lin1.params(out);
    lin2.params(out);
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

Embedding::Embedding(const std::string& name, std::size_t vocab, std::size_t dim, Rng& rng)
    : table(name + ".table", vocab, dim) {
    table.init_gaussian(rng, 0.02);
}

Mat Embedding::forward(const std::vector<int>& ids, Cache* cache) const {
    Mat y(ids.size(), table.cols);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int id = ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= table.rows) {
            throw DataError("token id out of embedding range");
        }
        const double* src = table.v.data() + static_cast<std::size_t>(id) * table.cols;
        double* dst = y.row(i);
        for (std::size_t k = 0; k < table.cols; ++k) dst[k] = src[k];
    }
    if (cache) cache->ids = ids;
    return y;
}

void Embedding::backward(const Mat& dy, const Cache& cache) {
    for (std::size_t i = 0; i < cache.ids.size(); ++i) {
        double* grow = table.g.data() + static_cast<std::size_t>(cache.ids[i]) * table.cols;
        const double* dyrow = dy.row(i);
        for (std::size_t k = 0; k < table.cols; ++k) grow[k] += dyrow[k];
    }
}

void Embedding::params(ParamList& out) { out.push_back(&table); }

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

Mat Dropout::forward(const Mat& x, Rng* rng, Cache* cache) const {
    if (p < 0.0 || p >= 1.0) throw ConfigError("dropout p must be in [0, 1)");
    if (rng == nullptr || p == 0.0) {
        if (cache) cache->mask.clear();
        return x;
    }
    const double keep = 1.0 - p;
    Mat y(x.rows, x.cols);
    if (cache) cache->mask.assign(x.a.size(), 0.0);
    for (std::size_t i = 0; i < x.a.size(); ++i) {
        const double m = rng->next_double() < p ? 0.0 : 1.0 / keep;
        y.a[i] = x.a[i] * m;
        if (cache) cache->mask[i] = m;
    }
    return y;
}

Mat Dropout::backward(const Mat& dy, const Cache& cache) const {
    if (cache.mask.empty()) return dy;
    Mat dx(dy.rows, dy.cols);
    for (std::size_t i = 0; i < dy.a.size(); ++i) dx.a[i] = dy.a[i] * cache.mask[i];
    return dx;
}

}  // namespace newsbench
