#include "newsbench/eval.hpp"

#include "newsbench/errors.hpp"
#include "newsbench/parallel.hpp"

namespace newsbench {

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels,
                          int positive_class) {
    if (predictions.size() != labels.size())
        throw DataError("prediction/label length mismatch");
    if (predictions.empty()) throw DataError("cannot build a confusion matrix from zero documents");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        bool pred_pos = predictions[i] == positive_class;
        bool true_pos = labels[i] == positive_class;
        if (pred_pos && true_pos) ++m.tp;
        else if (pred_pos && !true_pos) ++m.fp;
        else if (!pred_pos && true_pos) ++m.fn;
        else ++m.tn;
    }
    return m;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double precision, double recall) {
    double den = precision + recall;
    return den > 0.0 ? 2.0 * precision * recall / den : 0.0;
}

}  // namespace

MetricSet metrics(const ConfusionMatrix& m) {
    if (m.total() == 0) throw DataError("empty confusion matrix");
    const double accuracy = ratio(m.tp + m.tn, m.total());

    MetricSet set;
    set.positive.accuracy = accuracy;
    set.positive.precision = ratio(m.tp, m.tp + m.fp);
    set.positive.recall = ratio(m.tp, m.tp + m.fn);
    set.positive.f1 = f1_of(set.positive.precision, set.positive.recall);

    set.negative.accuracy = accuracy;
    set.negative.precision = ratio(m.tn, m.tn + m.fn);
    set.negative.recall = ratio(m.tn, m.tn + m.fp);
    set.negative.f1 = f1_of(set.negative.precision, set.negative.recall);

    set.macro.accuracy = accuracy;
    set.macro.precision = (set.positive.precision + set.negative.precision) / 2.0;
    set.macro.recall = (set.positive.recall + set.negative.recall) / 2.0;
    set.macro.f1 = (set.positive.f1 + set.negative.f1) / 2.0;
    return set;
}

namespace {

EvaluationReport run_evaluation(const TextClassifier& model, const LabeledCorpus& test,
                                const StopwordList& stopwords, int threads,
                                std::map<std::string, std::string> metadata) {
    if (test.empty()) throw DataError("test corpus is empty");
    if (!(model.label_space() == test.label_space()))
        throw DataError("label space mismatch between model and test corpus");

    const auto& docs = test.documents();
    std::vector<int> predictions(docs.size());
    std::vector<int> labels(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!docs[i].label) throw DataError("unlabelled document '" + docs[i].id + "' in test corpus");
        labels[i] = *docs[i].label;
    }
    parallel_for(docs.size(), threads, [&](std::size_t i) {
        CleanDocument clean = preprocess(docs[i], stopwords);
        predictions[i] = model.predict(clean.tokens);
    });

    EvaluationReport report;
    report.label_space = model.label_space();
    report.confusion = confusion(predictions, labels, model.label_space().positive());
    report.metric_set = metrics(report.confusion);
    report.metadata = std::move(metadata);
    report.metadata["model"] = model.kind();
    report.metadata["positive_class"] = model.label_space().names()[model.label_space().positive()];
    report.metadata["stopwords"] = stopwords.name();
    report.metadata["test_documents"] = std::to_string(docs.size());
    return report;
}

}  // namespace

EvaluationReport evaluate(const TextClassifier& model, const LabeledCorpus& test,
                          const StopwordList& stopwords, int threads,
                          std::map<std::string, std::string> metadata) {
    metadata.emplace("distribution_shift", "none");
    return run_evaluation(model, test, stopwords, threads, std::move(metadata));
}

EvaluationReport cross_evaluate(const TextClassifier& model, const LabeledCorpus& other,
                                const StopwordList& stopwords, int threads,
                                std::map<std::string, std::string> metadata) {
    metadata["distribution_shift"] = "cross-dataset";
    return run_evaluation(model, other, stopwords, threads, std::move(metadata));
}

namespace {

MetricDelta delta_of(double one, double two) {
    MetricDelta d;
    d.one_step = one;
    d.two_step = two;
    d.delta = two - one;
    d.relative_pct = one != 0.0 ? 100.0 * d.delta / one : 0.0;
    return d;
}

std::string metadata_or(const std::map<std::string, std::string>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? std::string() : it->second;
}

}  // namespace

ComparisonReport compare_two_step(const EvaluationReport& one_step,
                                  const EvaluationReport& two_step) {
    if (metadata_or(one_step.metadata, "train_set") != metadata_or(two_step.metadata, "train_set") ||
        metadata_or(one_step.metadata, "test_set") != metadata_or(two_step.metadata, "test_set"))
        throw DataError("cannot compare reports over different train/test datasets");

    ComparisonReport cmp;
    cmp.train_set = metadata_or(one_step.metadata, "train_set");
    cmp.test_set = metadata_or(one_step.metadata, "test_set");
    cmp.model = metadata_or(two_step.metadata, "model");
    cmp.accuracy = delta_of(one_step.metric_set.macro.accuracy, two_step.metric_set.macro.accuracy);
    cmp.precision = delta_of(one_step.metric_set.macro.precision, two_step.metric_set.macro.precision);
    cmp.recall = delta_of(one_step.metric_set.macro.recall, two_step.metric_set.macro.recall);
    cmp.f1 = delta_of(one_step.metric_set.macro.f1, two_step.metric_set.macro.f1);
    return cmp;
}

}  // namespace newsbench
