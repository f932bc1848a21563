#pragma once

#include <cstdint>
#include <vector>

#include "newsbench/neural/adamw.hpp"
#include "newsbench/neural/transformer.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

struct MlmObjective {
    double mask_rate = 0.15;
    double p_mask = 0.8;
    double p_keep = 0.1;
    double p_random = 0.1;
};

// Corrupted copy of a sequence plus per-position prediction targets
// (original id at selected positions, -1 elsewhere).
struct MlmExample {
    std::vector<int> ids;
    std::vector<int> targets;
};

struct MlmBatch {
    std::vector<MlmExample> examples;
    std::size_t target_count = 0;
};

// Each non-pad position is selected independently with probability mask_rate;
// selected positions are replaced by the mask id / kept / swapped for a random
// real token per the objective's proportions.
MlmExample build_mlm_example(const std::vector<int>& ids, const MlmObjective& objective,
                             std::size_t real_vocab, int mask_id, Rng& rng);

MlmBatch build_mlm_batch(const std::vector<std::vector<int>>& sequences,
                         const MlmObjective& objective, std::size_t real_vocab, int mask_id,
                         std::uint64_t seed);

// Sentence pair joined as A ++ [sep] ++ B; label 1 when B directly follows A
// in the same document, 0 when B comes from a different document.
struct NspPair {
    std::vector<int> ids;
    int label = 0;
};

// documents: per-document list of sentence (segment) id sequences. Emits
// count/2 positive and count - count/2 negative pairs, interleaved.
std::vector<NspPair> build_nsp_pairs(const std::vector<std::vector<std::vector<int>>>& documents,
                                     std::size_t count, int sep_id, std::uint64_t seed);

struct PretrainConfig {
    MlmObjective mlm;
    bool nsp = false;
    std::size_t steps = 50;
    std::size_t batch_size = 8;
    AdamWConfig opt;
    std::uint64_t seed = 0;
};

// Runs MLM (optionally + NSP) steps over the documents, updating the model in
// place. Returns the per-step loss trace (pre-update batch loss).
std::vector<double> pretrain(TransformerModel& model,
                             const std::vector<std::vector<std::vector<int>>>& documents,
                             const PretrainConfig& config);

// Chops a token-id sequence into consecutive segments of at most seg_len ids.
std::vector<std::vector<int>> segment_sequence(const std::vector<int>& ids, std::size_t seg_len);

}  // namespace newsbench
