#pragma once

#include <cstdint>
#include <vector>

#include "newsbench/neural/adamw.hpp"
#include "newsbench/neural/net.hpp"

namespace newsbench {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 16;
    std::size_t patience = 3;
    AdamWConfig opt;
    std::uint64_t seed = 0;
};

struct TrainTrace {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
};

// Mini-batch AdamW training with early stopping on validation loss: when the
// val loss fails to improve for more than `patience` consecutive epochs,
// training stops and the best-validation weights are restored.
TrainTrace train_classifier(NeuralNet& model, const std::vector<std::vector<int>>& train_ids,
                            const std::vector<int>& train_labels,
                            const std::vector<std::vector<int>>& val_ids,
                            const std::vector<int>& val_labels, const TrainConfig& config);

// Same loop, but the objective mixes hard-label cross-entropy with the
// teacher's temperature-softened distribution. Early stopping still watches
// plain validation cross-entropy.
TrainTrace distill(const NeuralNet& teacher, NeuralNet& student,
                   const std::vector<std::vector<int>>& train_ids,
                   const std::vector<int>& train_labels,
                   const std::vector<std::vector<int>>& val_ids,
                   const std::vector<int>& val_labels, double temperature, double alpha,
                   const TrainConfig& config);

}  // namespace newsbench
