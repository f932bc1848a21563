#include "newsbench/neural/train.hpp"

#include <cmath>
#include <limits>

#include "newsbench/errors.hpp"
#include "newsbench/neural/loss.hpp"

namespace newsbench {

namespace {

void check_sets(const std::vector<std::vector<int>>& train_ids, const std::vector<int>& train_labels,
                const std::vector<std::vector<int>>& val_ids, const std::vector<int>& val_labels) {
    if (train_ids.empty()) throw TrainError("empty training set");
    if (train_ids.size() != train_labels.size()) throw TrainError("train ids/labels size mismatch");
    if (val_ids.size() != val_labels.size()) throw TrainError("val ids/labels size mismatch");
    if (val_ids.empty()) throw TrainError("empty validation set");
    int seen[2] = {0, 0};
    for (int label : train_labels) {
        if (label != 0 && label != 1) throw TrainError("label out of range");
        seen[label] = 1;
    }
    if (!seen[0] || !seen[1]) throw TrainError("training set contains a single class");
    for (int label : val_labels) {
        if (label != 0 && label != 1) throw TrainError("label out of range");
    }
}

std::vector<std::vector<double>> snapshot(const ParamList& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const Tensor* p : params) out.push_back(p->v);
    return out;
}

void restore(const ParamList& params, const std::vector<std::vector<double>>& values) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->v = values[i];
}

double validation_loss(const NeuralNet& model, const std::vector<std::vector<int>>& ids,
                       const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        total += softmax_ce(model.infer_logits(ids[i]), labels[i], nullptr);
    }
    return total / static_cast<double>(ids.size());
}

// Shared epoch loop; the step callback computes the per-example loss and
// writes the dlogits used for backprop.
template <typename StepFn>
TrainTrace run_training(NeuralNet& model, const std::vector<std::vector<int>>& train_ids,
                        const std::vector<int>& train_labels,
                        const std::vector<std::vector<int>>& val_ids,
                        const std::vector<int>& val_labels, const TrainConfig& config,
                        StepFn&& step_fn) {
    check_sets(train_ids, train_labels, val_ids, val_labels);
    if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (config.epochs == 0) throw ConfigError("epochs must be positive");

    ParamList params = model.params();
    AdamW opt(config.opt);
    Rng shuffle_rng(derive_seed(config.seed, "train.shuffle"));
    Rng drop_rng(derive_seed(config.seed, "train.dropout"));

    TrainTrace trace;
    std::vector<std::vector<double>> best = snapshot(params);
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t bad_epochs = 0;

    std::vector<std::size_t> order(train_ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv = 1.0 / static_cast<double>(end - start);
            zero_grads(params);
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t i = order[b];
                std::array<double, 2> logits = model.forward_logits(train_ids[i], &drop_rng);
                std::array<double, 2> dlogits = {0.0, 0.0};
                const double loss = step_fn(i, logits, dlogits);
                if (!std::isfinite(loss)) throw TrainError("non-finite training loss");
                epoch_loss += loss;
                dlogits[0] *= inv;
                dlogits[1] *= inv;
                model.backward_logits(dlogits);
            }
            opt.step(params);
        }
        trace.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

        const double val = validation_loss(model, val_ids, val_labels);
        trace.val_loss.push_back(val);
        trace.epochs_run = epoch + 1;
        if (val < best_val - 1e-12) {
            best_val = val;
            best = snapshot(params);
            trace.best_epoch = epoch;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
            if (bad_epochs > config.patience) break;
        }
    }

    restore(params, best);
    return trace;
}

}  // namespace

TrainTrace train_classifier(NeuralNet& model, const std::vector<std::vector<int>>& train_ids,
                            const std::vector<int>& train_labels,
                            const std::vector<std::vector<int>>& val_ids,
                            const std::vector<int>& val_labels, const TrainConfig& config) {
    return run_training(model, train_ids, train_labels, val_ids, val_labels, config,
                        [&](std::size_t i, const std::array<double, 2>& logits,
                            std::array<double, 2>& dlogits) {
                            return softmax_ce(logits, train_labels[i], &dlogits);
                        });
}

TrainTrace distill(const NeuralNet& teacher, NeuralNet& student,
                   const std::vector<std::vector<int>>& train_ids,
                   const std::vector<int>& train_labels,
                   const std::vector<std::vector<int>>& val_ids,
                   const std::vector<int>& val_labels, double temperature, double alpha,
                   const TrainConfig& config) {
    if (temperature <= 0.0) throw ConfigError("distillation temperature must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("distillation alpha must be in [0, 1]");

    // The teacher is fixed, so its soft targets can be computed once.
    std::vector<std::array<double, 2>> teacher_logits;
    teacher_logits.reserve(train_ids.size());
    for (const std::vector<int>& ids : train_ids) {
        teacher_logits.push_back(teacher.infer_logits(ids));
    }

    return run_training(student, train_ids, train_labels, val_ids, val_labels, config,
                        [&](std::size_t i, const std::array<double, 2>& logits,
                            std::array<double, 2>& dlogits) {
                            return distill_loss(logits, teacher_logits[i], train_labels[i], alpha,
                                                temperature, &dlogits);
                        });
}

}  // namespace newsbench
