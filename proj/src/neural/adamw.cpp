#include "newsbench/neural/adamw.hpp"

#include <cmath>

#include "newsbench/errors.hpp"

namespace newsbench {

AdamW::AdamW(AdamWConfig config) : config_(config) {
    if (config_.lr <= 0.0) throw ConfigError("adamw lr must be positive");
    if (config_.beta1 < 0.0 || config_.beta1 >= 1.0) throw ConfigError("adamw beta1 out of range");
    if (config_.beta2 < 0.0 || config_.beta2 >= 1.0) throw ConfigError("adamw beta2 out of range");
    if (config_.eps <= 0.0) throw ConfigError("adamw eps must be positive");
    if (config_.weight_decay < 0.0) throw ConfigError("adamw weight_decay must be non-negative");
}

void AdamW::step(const ParamList& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));

    for (Tensor* p : params) {
        Moments& mom = state_[p->name];
        if (mom.m.empty()) {
            mom.m.assign(p->size(), 0.0);
            mom.v.assign(p->size(), 0.0);
        }
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double g = p->g[i];
            if (!std::isfinite(g)) {
                throw TrainError("non-finite gradient in parameter '" + p->name + "'");
            }
            mom.m[i] = config_.beta1 * mom.m[i] + (1.0 - config_.beta1) * g;
            mom.v[i] = config_.beta2 * mom.v[i] + (1.0 - config_.beta2) * g * g;
            const double mhat = mom.m[i] / bc1;
            const double vhat = mom.v[i] / bc2;
            p->v[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
            p->v[i] -= config_.lr * config_.weight_decay * p->v[i];
        }
    }
}

}  // namespace newsbench
