#include "newsbench/neural/lstm.hpp"

#include <cmath>

#include "newsbench/errors.hpp"
#include "newsbench/features.hpp"

namespace newsbench {

namespace {
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}
}  // namespace

LstmModel::LstmModel(const LstmConfig& config)
    : cfg_(config),
      emb_([&] {
          if (config.vocab == 0) throw ConfigError("lstm vocab must be positive");
          if (config.d_emb == 0 || config.hidden == 0) {
              throw ConfigError("lstm dims must be positive");
          }
          Rng rng(derive_seed(config.seed, "lstm.init"));
          return Embedding("emb", config.vocab, config.d_emb, rng);
      }()),
      wx_("lstm.wx", 4 * config.hidden, config.d_emb),
      wh_("lstm.wh", 4 * config.hidden, config.hidden),
      b_("lstm.b", 4 * config.hidden) {
    Rng rng(derive_seed(cfg_.seed, "lstm.weights"));
    wx_.init_gaussian(rng, 1.0 / std::sqrt(static_cast<double>(cfg_.d_emb)));
    wh_.init_gaussian(rng, 1.0 / std::sqrt(static_cast<double>(cfg_.hidden)));
    head_ = Linear("head", cfg_.hidden, 2, rng);
}

ParamList LstmModel::params() {
    ParamList out;
    emb_.params(out);
    out.push_back(&wx_);
    out.push_back(&wh_);
    out.push_back(&b_);
    head_.params(out);
    return out;
}

void LstmModel::step(const double* x, const double* h_prev, double* zi, double* zf, double* zg,
                     double* zo) const {
    const std::size_t H = cfg_.hidden;
    double* slabs[4] = {zi, zf, zg, zo};
    for (std::size_t gate = 0; gate < 4; ++gate) {
        for (std::size_t u = 0; u < H; ++u) {
            const std::size_t r = gate * H + u;
            double s = b_.v[r];
            const double* wxr = wx_.v.data() + r * cfg_.d_emb;
            for (std::size_t k = 0; k < cfg_.d_emb; ++k) s += wxr[k] * x[k];
            const double* whr = wh_.v.data() + r * H;
            for (std::size_t k = 0; k < H; ++k) s += whr[k] * h_prev[k];
            slabs[gate][u] = s;
        }
    }
}

std::array<double, 2> LstmModel::run(const std::vector<int>& ids, Cache* cache) const {
    std::vector<int> trimmed;
    trimmed.reserve(ids.size());
    for (int id : ids) {
        if (id == kPadId) break;
        trimmed.push_back(id);
    }
    const std::size_t L = trimmed.size();
    const std::size_t H = cfg_.hidden;

    Embedding::Cache emb_cache;
    Mat x = L > 0 ? emb_.forward(trimmed, &emb_cache) : Mat(0, cfg_.d_emb);

    Mat gi(L, H), gf(L, H), gg(L, H), go(L, H), cell(L, H), tc(L, H), hidden(L, H);
    std::vector<double> h(H, 0.0), c(H, 0.0), z(4 * H);
    for (std::size_t t = 0; t < L; ++t) {
        step(x.row(t), h.data(), z.data(), z.data() + H, z.data() + 2 * H, z.data() + 3 * H);
        for (std::size_t u = 0; u < H; ++u) {
            const double i_g = sigmoid(z[u]);
            const double f_g = sigmoid(z[H + u]);
            const double g_g = std::tanh(z[2 * H + u]);
            const double o_g = sigmoid(z[3 * H + u]);
            c[u] = f_g * c[u] + i_g * g_g;
            const double tcu = std::tanh(c[u]);
            h[u] = o_g * tcu;
            gi.at(t, u) = i_g;
            gf.at(t, u) = f_g;
            gg.at(t, u) = g_g;
            go.at(t, u) = o_g;
            cell.at(t, u) = c[u];
            tc.at(t, u) = tcu;
            hidden.at(t, u) = h[u];
        }
    }

    Mat hin(1, H);
    for (std::size_t u = 0; u < H; ++u) hin.at(0, u) = h[u];
    Mat logits = head_.forward(hin, cache ? &cache->head : nullptr);

    if (cache) {
        cache->ids = std::move(trimmed);
        cache->x = std::move(x);
        cache->gate_i = std::move(gi);
        cache->gate_f = std::move(gf);
        cache->gate_g = std::move(gg);
        cache->gate_o = std::move(go);
        cache->cell = std::move(cell);
        cache->tanh_cell = std::move(tc);
        cache->hidden = std::move(hidden);
    }
    return {logits.at(0, 0), logits.at(0, 1)};
}

std::array<double, 2> LstmModel::forward_logits(const std::vector<int>& ids, Rng*) {
    return run(ids, &cache_);
}

std::array<double, 2> LstmModel::infer_logits(const std::vector<int>& ids) const {
    return run(ids, nullptr);
}

void LstmModel::backward_logits(const std::array<double, 2>& dlogits) {
    const std::size_t H = cfg_.hidden;
    const std::size_t L = cache_.ids.size();

    Mat dl(1, 2);
    dl.at(0, 0) = dlogits[0];
    dl.at(0, 1) = dlogits[1];
    Mat dh_last = head_.backward(dl, cache_.head);

    if (L == 0) return;

    std::vector<double> dh(H), dc(H, 0.0), dz(4 * H);
    for (std::size_t u = 0; u < H; ++u) dh[u] = dh_last.at(0, u);

    Mat dx(L, cfg_.d_emb);
    for (std::size_t t = L; t-- > 0;) {
        const double* c_prev_row = t > 0 ? cache_.cell.row(t - 1) : nullptr;
        const double* h_prev_row = t > 0 ? cache_.hidden.row(t - 1) : nullptr;
        for (std::size_t u = 0; u < H; ++u) {
            const double i_g = cache_.gate_i.at(t, u);
            const double f_g = cache_.gate_f.at(t, u);
            const double g_g = cache_.gate_g.at(t, u);
            const double o_g = cache_.gate_o.at(t, u);
            const double tcu = cache_.tanh_cell.at(t, u);
            const double c_prev = c_prev_row ? c_prev_row[u] : 0.0;

            const double d_o = dh[u] * tcu;
            dc[u] += dh[u] * o_g * (1.0 - tcu * tcu);
            const double d_i = dc[u] * g_g;
            const double d_g = dc[u] * i_g;
            const double d_f = dc[u] * c_prev;

            dz[u] = d_i * i_g * (1.0 - i_g);
            dz[H + u] = d_f * f_g * (1.0 - f_g);
            dz[2 * H + u] = d_g * (1.0 - g_g * g_g);
            dz[3 * H + u] = d_o * o_g * (1.0 - o_g);

            dc[u] *= f_g;  // becomes dc_prev
        }

        const double* xrow = cache_.x.row(t);
        double* dxrow = dx.row(t);
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            const double d = dz[r];
            if (d == 0.0) continue;
            b_.g[r] += d;
            const double* wxr = wx_.v.data() + r * cfg_.d_emb;
            double* gwxr = wx_.g.data() + r * cfg_.d_emb;
            for (std::size_t k = 0; k < cfg_.d_emb; ++k) {
                gwxr[k] += d * xrow[k];
                dxrow[k] += d * wxr[k];
            }
            const double* whr = wh_.v.data() + r * H;
            double* gwhr = wh_.g.data() + r * H;
            for (std::size_t k = 0; k < H; ++k) {
                if (h_prev_row) gwhr[k] += d * h_prev_row[k];
                dh[k] += d * whr[k];
            }
        }
    }

    Embedding::Cache emb_cache;
    emb_cache.ids = cache_.ids;
    emb_.backward(dx, emb_cache);
}

}  // namespace newsbench
