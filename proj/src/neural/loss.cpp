#include "newsbench/neural/loss.hpp"

#include <algorithm>
#include <cmath>

#include "newsbench/errors.hpp"

namespace newsbench {

std::array<double, 2> softmax2(const std::array<double, 2>& logits, double temperature) {
    const double a = logits[0] / temperature;
    const double b = logits[1] / temperature;
    const double m = std::max(a, b);
    const double e0 = std::exp(a - m);
    const double e1 = std::exp(b - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double softmax_ce(const std::array<double, 2>& logits, int label, std::array<double, 2>* dlogits) {
    if (label != 0 && label != 1) throw TrainError("label out of range in cross-entropy");
    const std::array<double, 2> p = softmax2(logits);
    if (dlogits) {
        (*dlogits)[0] = p[0] - (label == 0 ? 1.0 : 0.0);
        (*dlogits)[1] = p[1] - (label == 1 ? 1.0 : 0.0);
    }
    // -log p[label], computed from logits for stability
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    return lse - logits[label];
}

double distill_loss(const std::array<double, 2>& student_logits,
                    const std::array<double, 2>& teacher_logits, int label, double alpha,
                    double temperature, std::array<double, 2>* dlogits) {
    if (temperature <= 0.0) throw ConfigError("distillation temperature must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("distillation alpha must be in [0, 1]");

    std::array<double, 2> dce = {0.0, 0.0};
    const double ce = softmax_ce(student_logits, label, dlogits ? &dce : nullptr);

    double kl = 0.0;
    std::array<double, 2> dkl = {0.0, 0.0};
    if (alpha < 1.0) {
        const std::array<double, 2> pt = softmax2(teacher_logits, temperature);
        const std::array<double, 2> ps = softmax2(student_logits, temperature);
        for (int c = 0; c < 2; ++c) {
            if (pt[c] > 0.0) kl += pt[c] * (std::log(pt[c]) - std::log(ps[c]));
        }
        // d/dlogits of T^2*KL(pt || ps) = T*(ps - pt)
        dkl[0] = temperature * (ps[0] - pt[0]);
        dkl[1] = temperature * (ps[1] - pt[1]);
    }

    if (dlogits) {
        (*dlogits)[0] = alpha * dce[0] + (1.0 - alpha) * dkl[0];
        (*dlogits)[1] = alpha * dce[1] + (1.0 - alpha) * dkl[1];
    }
    return alpha * ce + (1.0 - alpha) * temperature * temperature * kl;
}

double softmax_ce_vec(const double* logits, std::size_t n, std::size_t target,
                      std::vector<double>* dlogits) {
    if (target >= n) throw TrainError("target out of range in cross-entropy");
    double m = logits[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, logits[i]);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) denom += std::exp(logits[i] - m);
    const double lse = m + std::log(denom);
    if (dlogits) {
        dlogits->assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*dlogits)[i] = std::exp(logits[i] - m) / denom;
        (*dlogits)[target] -= 1.0;
    }
    return lse - logits[target];
}

}  // namespace newsbench
