#include "newsbench/pipeline.hpp"

#include "newsbench/errors.hpp"
#include "newsbench/parallel.hpp"

namespace newsbench {

double OpinionFilter::opinion_probability(const TokenList& clean_tokens) const {
    const int opinion = model->label_space().positive();
    return model->predict_proba(clean_tokens)[opinion];
}

std::string verdict_name(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Fake: return "Fake";
        case VerdictKind::Real: return "Real";
        case VerdictKind::OpinionExcluded: return "OpinionExcluded";
    }
    return "OpinionExcluded";
}

PipelineVerdict TwoStepPipeline::classify(const Document& doc) const {
    const CleanDocument clean = preprocess(doc, stopwords);

    const double p_opinion = filter.opinion_probability(clean.tokens);
    if (p_opinion >= filter.tau) {
        return {VerdictKind::OpinionExcluded, p_opinion};
    }

    const LabelSpace& space = veracity->label_space();
    const std::array<double, 2> p = veracity->predict_proba(clean.tokens);
    const int label = p[space.positive()] > p[space.negative()] ? space.positive()
                                                                : space.negative();
    const VerdictKind kind = space.names()[label] == "Fake" ? VerdictKind::Fake
                                                            : VerdictKind::Real;
    return {kind, p[label]};
}

namespace {

void fit_on_corpus(TextClassifier& model, const LabeledCorpus& corpus,
                   const StopwordList& stopwords) {
    std::vector<TokenList> docs;
    std::vector<int> labels;
    docs.reserve(corpus.size());
    labels.reserve(corpus.size());
    for (const Document& doc : corpus.documents()) {
        if (!doc.label) throw DataError("unlabelled document '" + doc.id + "' in training corpus");
        docs.push_back(preprocess(doc, stopwords).tokens);
        labels.push_back(*doc.label);
    }
    model.fit(docs, labels);
}

}  // namespace

OpinionFilter train_opinion_filter(const LabeledCorpus& factop, const ClassifierSpec& spec,
                                   double tau, const StopwordList& stopwords,
                                   const SplitSpec& split_spec) {
    if (factop.label_space().kind() != LabelKind::Subjectivity) {
        throw DataError("opinion filter needs a Subjectivity-labelled corpus");
    }
    if (tau <= 0.0 || tau >= 1.0) throw ConfigError("filter threshold tau must be in (0, 1)");
    const auto counts = factop.label_counts();
    if (counts[0] == 0 || counts[1] == 0) {
        throw TrainError("fact/opinion corpus contains a single class");
    }

    SplitResult parts = split(factop, split_spec);

    OpinionFilter filter;
    filter.tau = tau;
    filter.model = make_classifier(spec, factop.label_space());
    fit_on_corpus(*filter.model, parts.train, stopwords);

    if (!parts.test.empty()) {
        EvaluationReport report = evaluate(*filter.model, parts.test, stopwords, spec.threads);
        filter.holdout_accuracy = report.metric_set.macro.accuracy;
    }
    return filter;
}

std::pair<LabeledCorpus, std::size_t> filter_corpus(const LabeledCorpus& corpus,
                                                    const OpinionFilter& filter,
                                                    const StopwordList& stopwords, int threads) {
    if (corpus.label_space().kind() != LabelKind::Veracity) {
        throw DataError("filter_corpus expects a Veracity-labelled corpus");
    }

    const std::vector<Document>& docs = corpus.documents();
    std::vector<unsigned char> flagged(docs.size(), 0);
    parallel_for(docs.size(), threads, [&](std::size_t i) {
        const CleanDocument clean = preprocess(docs[i], stopwords);
        flagged[i] = filter.is_opinion(clean.tokens) ? 1 : 0;
    });

    LabeledCorpus filtered(corpus.label_space());
    std::size_t removed = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (flagged[i]) {
            ++removed;
        } else {
            filtered.add(docs[i]);
        }
    }
    return {std::move(filtered), removed};
}

TwoStepPipeline train_two_step(const LabeledCorpus& veracity_train, const LabeledCorpus& factop,
                               const PipelineTrainConfig& config) {
    if (veracity_train.empty()) throw DataError("empty veracity training corpus");
    if (factop.empty()) throw DataError("empty fact/opinion corpus");

    TwoStepPipeline pipeline{OpinionFilter{}, nullptr, PipelineProvenance{},
                             config.use_stopwords ? StopwordList::english()
                                                  : StopwordList::empty()};

    pipeline.filter = train_opinion_filter(factop, config.filter, config.tau, pipeline.stopwords,
                                           config.filter_split);

    auto [filtered, removed] =
        filter_corpus(veracity_train, pipeline.filter, pipeline.stopwords, config.threads);

    const auto counts = filtered.label_counts();
    if (counts[0] == 0 || counts[1] == 0) {
        throw TrainError("class eliminated by filtering");
    }

    pipeline.veracity = make_classifier(config.veracity, veracity_train.label_space());
    fit_on_corpus(*pipeline.veracity, filtered, pipeline.stopwords);

    pipeline.provenance.filter_kind = config.filter.kind;
    pipeline.provenance.veracity_kind = config.veracity.kind;
    pipeline.provenance.tau = config.tau;
    pipeline.provenance.filter_holdout_accuracy = pipeline.filter.holdout_accuracy;
    pipeline.provenance.factop_documents = factop.size();
    pipeline.provenance.veracity_documents = veracity_train.size();
    pipeline.provenance.removed_by_filter = removed;
    return pipeline;
}

EvaluationReport evaluate_pipeline(const TwoStepPipeline& pipeline, const LabeledCorpus& test,
                                   bool exclude_opinion, int threads) {
    if (test.empty()) throw DataError("empty test corpus");
    const LabelSpace& space = pipeline.veracity->label_space();
    if (!(space == test.label_space())) throw DataError("label space mismatch in evaluation");

    const std::vector<Document>& docs = test.documents();
    std::vector<int> labels(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!docs[i].label) {
            throw DataError("unlabelled document '" + docs[i].id + "' in test corpus");
        }
        labels[i] = *docs[i].label;
    }

    std::vector<PipelineVerdict> verdicts(docs.size());
    parallel_for(docs.size(), threads, [&](std::size_t i) {
        verdicts[i] = pipeline.classify(docs[i]);
    });

    std::vector<int> predictions;
    std::vector<int> kept_labels;
    std::size_t excluded = 0;
    const int fake_label = space.names()[0] == "Fake" ? 0 : 1;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        int predicted;
        switch (verdicts[i].kind) {
            case VerdictKind::Fake: predicted = fake_label; break;
            case VerdictKind::Real: predicted = 1 - fake_label; break;
            default:
                ++excluded;
                if (exclude_opinion) continue;
                // Scored as a miss for the document's true label.
                predicted = 1 - labels[i];
                break;
        }
        predictions.push_back(predicted);
        kept_labels.push_back(labels[i]);
    }
    if (predictions.empty()) throw DataError("all test documents excluded by the opinion filter");

    EvaluationReport report;
    report.label_space = space;
    report.confusion = confusion(predictions, kept_labels, space.positive());
    report.metric_set = metrics(report.confusion);
    report.metadata["model"] = pipeline.veracity->kind();
    report.metadata["mode"] = "two_step";
    report.metadata["positive_class"] = space.names()[space.positive()];
    report.metadata["stopwords"] = pipeline.stopwords.name();
    report.metadata["test_documents"] = std::to_string(docs.size());
    report.metadata["opinion_excluded"] = std::to_string(excluded);
    report.metadata["opinion_mode"] = exclude_opinion ? "exclude" : "count_as_error";
    return report;
}

}  // namespace newsbench
