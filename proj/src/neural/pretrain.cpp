#include "newsbench/neural/pretrain.hpp"

#include <cmath>

#include "newsbench/errors.hpp"
#include "newsbench/features.hpp"

namespace newsbench {

namespace {

void check_objective(const MlmObjective& objective) {
    if (objective.mask_rate < 0.0 || objective.mask_rate >= 1.0) {
        throw ConfigError("mlm mask_rate must be in [0, 1)");
    }
    if (objective.p_mask < 0.0 || objective.p_keep < 0.0 || objective.p_random < 0.0) {
        throw ConfigError("mlm proportions must be non-negative");
    }
    const double sum = objective.p_mask + objective.p_keep + objective.p_random;
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mlm proportions must sum to 1");
}

}  // namespace

MlmExample build_mlm_example(const std::vector<int>& ids, const MlmObjective& objective,
                             std::size_t real_vocab, int mask_id, Rng& rng) {
    MlmExample out;
    out.ids = ids;
    out.targets.assign(ids.size(), -1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == kPadId) continue;
        if (rng.next_double() >= objective.mask_rate) continue;
        out.targets[i] = ids[i];
        const double u = rng.next_double();
        if (u < objective.p_mask) {
            out.ids[i] = mask_id;
        } else if (u < objective.p_mask + objective.p_keep) {
            // keep the original token
        } else {
            out.ids[i] = kSequenceIdOffset + static_cast<int>(rng.next_below(real_vocab));
        }
    }
    return out;
}

MlmBatch build_mlm_batch(const std::vector<std::vector<int>>& sequences,
                         const MlmObjective& objective, std::size_t real_vocab, int mask_id,
                         std::uint64_t seed) {
    if (sequences.empty()) throw DataError("empty sequence batch for MLM");
    check_objective(objective);
    MlmBatch batch;
    batch.examples.reserve(sequences.size());
    Rng rng(seed);
    for (const std::vector<int>& ids : sequences) {
        batch.examples.push_back(build_mlm_example(ids, objective, real_vocab, mask_id, rng));
        for (int t : batch.examples.back().targets) {
            if (t >= 0) ++batch.target_count;
        }
    }
    return batch;
}

std::vector<NspPair> build_nsp_pairs(const std::vector<std::vector<std::vector<int>>>& documents,
                                     std::size_t count, int sep_id, std::uint64_t seed) {
    std::vector<std::size_t> multi;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        if (documents[d].size() >= 2) multi.push_back(d);
    }
    if (multi.empty()) throw DataError("no multi-sentence documents for NSP pairs");
    if (documents.size() < 2) throw DataError("NSP negatives need at least two documents");

    Rng rng(seed);
    std::vector<NspPair> pairs;
    pairs.reserve(count);
    const std::size_t positives = count / 2;
    for (std::size_t n = 0; n < count; ++n) {
        NspPair pair;
        // Interleave so any even prefix is balanced; odd counts get the extra
        // negative.
        const bool positive = n % 2 == 0 && n / 2 < positives;
        if (positive) {
            const auto& doc = documents[multi[rng.next_below(multi.size())]];
            const std::size_t s = rng.next_below(doc.size() - 1);
            pair.ids = doc[s];
            pair.ids.push_back(sep_id);
            pair.ids.insert(pair.ids.end(), doc[s + 1].begin(), doc[s + 1].end());
            pair.label = 1;
        } else {
            const std::size_t da = rng.next_below(documents.size());
            std::size_t db = rng.next_below(documents.size());
            while (db == da) db = rng.next_below(documents.size());
            const auto& a = documents[da];
            const auto& b = documents[db];
            if (a.empty() || b.empty()) throw DataError("NSP document without sentences");
            pair.ids = a[rng.next_below(a.size())];
            pair.ids.push_back(sep_id);
            const auto& bseg = b[rng.next_below(b.size())];
            pair.ids.insert(pair.ids.end(), bseg.begin(), bseg.end());
            pair.label = 0;
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

std::vector<std::vector<int>> segment_sequence(const std::vector<int>& ids, std::size_t seg_len) {
    if (seg_len == 0) throw ConfigError("segment length must be positive");
    std::vector<std::vector<int>> out;
    for (std::size_t start = 0; start < ids.size(); start += seg_len) {
        const std::size_t end = std::min(ids.size(), start + seg_len);
        out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                         ids.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

std::vector<double> pretrain(TransformerModel& model,
                             const std::vector<std::vector<std::vector<int>>>& documents,
                             const PretrainConfig& config) {
    check_objective(config.mlm);
    if (!model.config().mlm_head) throw ConfigError("pretraining needs a model with an MLM head");
    if (config.nsp && !model.config().nsp_head) {
        throw ConfigError("NSP pretraining needs a model with an NSP head");
    }
    if (config.batch_size == 0) throw ConfigError("pretrain batch_size must be positive");
    if (documents.empty()) throw DataError("empty pretraining corpus");

    const std::size_t real_vocab = model.config().vocab - 4;
    const int mask_id = mask_token_id(real_vocab);
    const int sep_id = sep_token_id(real_vocab);
    const std::size_t max_len = model.config().max_len;

    std::vector<std::vector<int>> pool;
    for (const auto& doc : documents) {
        for (const auto& seg : doc) {
            if (!seg.empty()) pool.push_back(seg);
        }
    }
    if (pool.empty()) throw DataError("pretraining corpus has no tokens");

    ParamList params = model.params();
    AdamW opt(config.opt);
    Rng pick(derive_seed(config.seed, "pretrain.pick"));
    Rng drop(derive_seed(config.seed, "pretrain.dropout"));
    Rng* drop_rng = model.config().dropout > 0.0 ? &drop : nullptr;

    std::vector<double> trace;
    trace.reserve(config.steps);
    for (std::size_t step = 0; step < config.steps; ++step) {
        std::vector<std::vector<int>> batch_seqs;
        std::vector<int> nsp_labels;
        if (config.nsp) {
            std::vector<NspPair> pairs = build_nsp_pairs(
                documents, config.batch_size, sep_id, derive_seed(config.seed, step));
            for (NspPair& pair : pairs) {
                if (pair.ids.size() > max_len) pair.ids.resize(max_len);
                batch_seqs.push_back(std::move(pair.ids));
                nsp_labels.push_back(pair.label);
            }
        } else {
            for (std::size_t b = 0; b < config.batch_size; ++b) {
                std::vector<int> seq = pool[pick.next_below(pool.size())];
                if (seq.size() > max_len) seq.resize(max_len);
                batch_seqs.push_back(std::move(seq));
            }
        }

        MlmBatch batch = build_mlm_batch(batch_seqs, config.mlm, real_vocab, mask_id,
                                         derive_seed(derive_seed(config.seed, "mlm"), step));
        if (batch.target_count == 0) throw TrainError("MLM step has no targets");

        zero_grads(params);
        double mlm_loss = 0.0;
        const double mlm_scale = 1.0 / static_cast<double>(batch.target_count);
        for (const MlmExample& example : batch.examples) {
            mlm_loss += model.mlm_step(example.ids, example.targets, drop_rng, true, mlm_scale);
        }
        mlm_loss *= mlm_scale;

        double nsp_loss = 0.0;
        if (config.nsp) {
            const double nsp_scale = 1.0 / static_cast<double>(batch.examples.size());
            for (std::size_t b = 0; b < batch.examples.size(); ++b) {
                nsp_loss +=
                    model.nsp_step(batch.examples[b].ids, nsp_labels[b], drop_rng, true, nsp_scale);
            }
            nsp_loss *= nsp_scale;
        }

        const double loss = mlm_loss + nsp_loss;
        if (!std::isfinite(loss)) throw TrainError("non-finite pretraining loss");
        trace.push_back(loss);
        opt.step(params);
    }
    return trace;
}

}  // namespace newsbench
