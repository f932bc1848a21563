#include "newsbench/neural/attention.hpp"

#include <cmath>

#include "newsbench/errors.hpp"

namespace newsbench {

MultiHeadAttention::MultiHeadAttention(const std::string& name, const AttentionConfig& config,
                                       Rng& rng)
    : cfg(config),
      wq(name + ".wq", config.d_model, config.d_model, rng),
      wk(name + ".wk", config.d_model, config.d_model, rng),
      wv(name + ".wv", config.d_model, config.d_model, rng),
      wo(name + ".wo", config.d_model, config.d_model, rng) {
    if (cfg.heads == 0 || cfg.d_model % cfg.heads != 0) {
        throw ConfigError("attention heads must divide d_model");
    }
    if (cfg.disentangled) {
        if (cfg.rel_k == 0) throw ConfigError("disentangled attention needs rel_k >= 1");
        rel_emb = Tensor(name + ".rel_emb", 2 * cfg.rel_k, cfg.d_model);
        rel_emb.init_gaussian(rng, 0.02);
    }
}

std::size_t MultiHeadAttention::rel_bucket(std::size_t i, std::size_t j) const {
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(cfg.rel_k);
    const std::ptrdiff_t rel = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j);
    if (rel <= -k) return 0;
    if (rel >= k) return 2 * cfg.rel_k - 1;
    return static_cast<std::size_t>(rel + k);
}

Mat MultiHeadAttention::forward(const Mat& x, const std::vector<unsigned char>& valid, Cache* cache,
                                std::vector<Mat>* probs_out) const {
    const std::size_t T = x.rows;
    if (T == 0) throw DataError("attention over empty sequence");
    if (valid.size() != T) throw DataError("attention mask length mismatch");
    bool any_valid = false;
    for (unsigned char v : valid) any_valid = any_valid || v != 0;
    if (!any_valid) throw DataError("attention over all-padding sequence");

    const std::size_t H = cfg.heads;
    const std::size_t dh = d_head();
    const double scale = cfg.disentangled ? 1.0 / std::sqrt(3.0 * static_cast<double>(dh))
                                          : 1.0 / std::sqrt(static_cast<double>(dh));

    Mat q = wq.forward(x, cache ? &cache->cq : nullptr);
    Mat k = wk.forward(x, cache ? &cache->ck : nullptr);
    Mat v = wv.forward(x, cache ? &cache->cv : nullptr);

    Mat context(T, cfg.d_model);
    std::vector<Mat> probs(H);

    for (std::size_t h = 0; h < H; ++h) {
        const std::size_t off = h * dh;
        Mat scores(T, T);
        for (std::size_t i = 0; i < T; ++i) {
            const double* qrow = q.row(i) + off;
            for (std::size_t j = 0; j < T; ++j) {
                if (!valid[j]) continue;
                const double* krow = k.row(j) + off;
                double s = 0.0;
                for (std::size_t c = 0; c < dh; ++c) s += qrow[c] * krow[c];
                if (cfg.disentangled) {
                    const double* c2p = rel_emb.v.data() + rel_bucket(i, j) * cfg.d_model + off;
                    const double* p2c = rel_emb.v.data() + rel_bucket(j, i) * cfg.d_model + off;
                    for (std::size_t c = 0; c < dh; ++c) {
                        s += qrow[c] * c2p[c] + krow[c] * p2c[c];
                    }
                }
                scores.at(i, j) = s * scale;
            }
        }

        Mat& p = probs[h];
        p = Mat(T, T);
        for (std::size_t i = 0; i < T; ++i) {
            double mx = -1e300;
            for (std::size_t j = 0; j < T; ++j) {
                if (valid[j] && scores.at(i, j) > mx) mx = scores.at(i, j);
            }
            double denom = 0.0;
            for (std::size_t j = 0; j < T; ++j) {
                if (!valid[j]) continue;
                const double e = std::exp(scores.at(i, j) - mx);
                p.at(i, j) = e;
                denom += e;
            }
            for (std::size_t j = 0; j < T; ++j) {
                if (valid[j]) p.at(i, j) /= denom;
            }
        }

        for (std::size_t i = 0; i < T; ++i) {
            double* crow = context.row(i) + off;
            for (std::size_t j = 0; j < T; ++j) {
                const double pij = p.at(i, j);
                if (pij == 0.0) continue;
                const double* vrow = v.row(j) + off;
                for (std::size_t c = 0; c < dh; ++c) crow[c] += pij * vrow[c];
            }
        }
    }

    if (probs_out) *probs_out = probs;
    if (cache) {
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->probs = std::move(probs);
        cache->valid = valid;
    }
    return wo.forward(context, cache ? &cache->co : nullptr);
}

Mat MultiHeadAttention::backward(const Mat& dy, const Cache& cache) {
    const std::size_t T = dy.rows;
    const std::size_t H = cfg.heads;
    const std::size_t dh = d_head();
    const double scale = cfg.disentangled ? 1.0 / std::sqrt(3.0 * static_cast<double>(dh))
                                          : 1.0 / std::sqrt(static_cast<double>(dh));

    Mat dcontext = wo.backward(dy, cache.co);
    Mat dq(T, cfg.d_model), dk(T, cfg.d_model), dv(T, cfg.d_model);

    for (std::size_t h = 0; h < H; ++h) {
        const std::size_t off = h * dh;
        const Mat& p = cache.probs[h];

        // dP and dV from context = P·V
        Mat dp(T, T);
        for (std::size_t i = 0; i < T; ++i) {
            const double* dcrow = dcontext.row(i) + off;
            for (std::size_t j = 0; j < T; ++j) {
                const double pij = p.at(i, j);
                const double* vrow = cache.v.row(j) + off;
                double s = 0.0;
                for (std::size_t c = 0; c < dh; ++c) s += dcrow[c] * vrow[c];
                dp.at(i, j) = s;
                if (pij != 0.0) {
                    double* dvrow = dv.row(j) + off;
                    for (std::size_t c = 0; c < dh; ++c) dvrow[c] += pij * dcrow[c];
                }
            }
        }

        // softmax backward: dS = P ⊙ (dP − rowsum(dP ⊙ P))
        Mat ds(T, T);
        for (std::size_t i = 0; i < T; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < T; ++j) dot += dp.at(i, j) * p.at(i, j);
            for (std::size_t j = 0; j < T; ++j) {
                ds.at(i, j) = p.at(i, j) * (dp.at(i, j) - dot);
            }
        }

        for (std::size_t i = 0; i < T; ++i) {
            double* dqrow = dq.row(i) + off;
            const double* qrow = cache.q.row(i) + off;
            for (std::size_t j = 0; j < T; ++j) {
                const double d = ds.at(i, j) * scale;
                if (d == 0.0) continue;
                const double* krow = cache.k.row(j) + off;
                double* dkrow = dk.row(j) + off;
                for (std::size_t c = 0; c < dh; ++c) {
                    dqrow[c] += d * krow[c];
                    dkrow[c] += d * qrow[c];
                }
                if (cfg.disentangled) {
                    const std::size_t bij = rel_bucket(i, j);
                    const std::size_t bji = rel_bucket(j, i);
                    const double* c2p = rel_emb.v.data() + bij * cfg.d_model + off;
                    const double* p2c = rel_emb.v.data() + bji * cfg.d_model + off;
                    double* gc2p = rel_emb.g.data() + bij * cfg.d_model + off;
                    double* gp2c = rel_emb.g.data() + bji * cfg.d_model + off;
                    for (std::size_t c = 0; c < dh; ++c) {
                        dqrow[c] += d * c2p[c];
                        dkrow[c] += d * p2c[c];
                        gc2p[c] += d * qrow[c];
                        gp2c[c] += d * krow[c];
                    }
                }
            }
        }
    }

    Mat dx = wq.backward(dq, cache.cq);
    add_inplace(dx, wk.backward(dk, cache.ck));
    add_inplace(dx, wv.backward(dv, cache.cv));
    return dx;
}

void MultiHeadAttention::params(ParamList& out) {
    wq.params(out);
    wk.params(out);
    wv.params(out);
    wo.params(out);
    if (cfg.disentangled) out.push_back(&rel_emb);
}

}  // namespace newsbench
