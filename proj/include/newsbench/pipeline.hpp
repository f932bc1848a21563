#pragma once

#include <memory>
#include <string>
#include <utility>

#include "newsbench/corpus.hpp"
#include "newsbench/eval.hpp"
#include "newsbench/factory.hpp"
#include "newsbench/preprocess.hpp"

namespace newsbench {

// Fact-vs-opinion gate: a Subjectivity classifier plus an inclusive decision
// threshold on P(Opinion).
struct OpinionFilter {
    std::shared_ptr<TextClassifier> model;
    double tau = 0.5;
    double holdout_accuracy = 0.0;

    double opinion_probability(const TokenList& clean_tokens) const;
    bool is_opinion(const TokenList& clean_tokens) const {
        return opinion_probability(clean_tokens) >= tau;
    }
};

enum class VerdictKind { Fake, Real, OpinionExcluded };

struct PipelineVerdict {
    VerdictKind kind = VerdictKind::OpinionExcluded;
    double confidence = 0.0;  // deciding stage's probability
};

std::string verdict_name(VerdictKind kind);

struct PipelineProvenance {
    std::string filter_kind;
    std::string veracity_kind;
    double tau = 0.5;
    double filter_holdout_accuracy = 0.0;
    std::size_t factop_documents = 0;
    std::size_t veracity_documents = 0;
    std::size_t removed_by_filter = 0;
};

class TwoStepPipeline {
public:
    OpinionFilter filter;
    std::shared_ptr<TextClassifier> veracity;
    PipelineProvenance provenance;
    StopwordList stopwords = StopwordList::empty();

    // Filter first: Opinion -> OpinionExcluded without consulting the
    // veracity model; otherwise the veracity argmax with its probability.
    PipelineVerdict classify(const Document& doc) const;
};

// Trains the filter with the standard split machinery and records its holdout
// accuracy. The corpus must use the Subjectivity label space.
OpinionFilter train_opinion_filter(const LabeledCorpus& factop, const ClassifierSpec& spec,
                                   double tau, const StopwordList& stopwords,
                                   const SplitSpec& split);

// Returns the documents the filter labels Fact, in corpus order, plus the
// removed count.
std::pair<LabeledCorpus, std::size_t> filter_corpus(const LabeledCorpus& corpus,
                                                    const OpinionFilter& filter,
                                                    const StopwordList& stopwords,
                                                    int threads = 1);

struct PipelineTrainConfig {
    ClassifierSpec filter;
    ClassifierSpec veracity;
    double tau = 0.5;
    SplitSpec filter_split;  // used for the filter's holdout accuracy
    bool use_stopwords = true;
    int threads = 1;
};

TwoStepPipeline train_two_step(const LabeledCorpus& veracity_train, const LabeledCorpus& factop,
                               const PipelineTrainConfig& config);

// Veracity metrics for a pipeline over a full test corpus. By default an
// OpinionExcluded verdict counts as an incorrect prediction for the document's
// true label; with exclude_opinion the document is dropped from the counts.
EvaluationReport evaluate_pipeline(const TwoStepPipeline& pipeline, const LabeledCorpus& test,
                                   bool exclude_opinion = false, int threads = 1);

}  // namespace newsbench
