#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "newsbench/baselines.hpp"
#include "newsbench/config.hpp"
#include "newsbench/csv.hpp"
#include "newsbench/errors.hpp"
#include "newsbench/eval.hpp"
#include "newsbench/factory.hpp"
#include "newsbench/model_io.hpp"
#include "newsbench/neural/neural_classifier.hpp"
#include "newsbench/pipeline.hpp"
#include "newsbench/report.hpp"

namespace nb = newsbench;
namespace fs = std::filesystem;

namespace {

struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<std::string> run_id;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_override_flags(CLI::App* sub, Overrides& o) {
    sub->add_option("--out-dir", o.out_dir, "Override the config's output directory");
    sub->add_option("--run-id", o.run_id, "Override the config's run id");
    sub->add_option("--seed", o.seed, "Override the config's top-level seed");
    sub->add_option("--threads", o.threads, "Override the config's thread count");
}

nb::RunConfig load_config(const std::string& path, const Overrides& o) {
    std::ifstream in(path);
    if (!in) throw nb::ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw nb::ConfigError("config: invalid JSON: " + std::string(e.what()));
    }
    if (o.out_dir) root["out_dir"] = *o.out_dir;
    if (o.run_id) root["run_id"] = *o.run_id;
    if (o.seed) root["seed"] = *o.seed;
    if (o.threads) root["threads"] = *o.threads;
    return nb::parse_run_config(root.dump());
}

nb::StopwordList stopwords_of(const nb::RunConfig& config) {
    return config.use_stopwords ? nb::StopwordList::english() : nb::StopwordList::empty();
}

void corpus_tokens(const nb::LabeledCorpus& corpus, const nb::StopwordList& stopwords,
                   std::vector<nb::TokenList>& docs, std::vector<int>& labels) {
    docs.clear();
    labels.clear();
    docs.reserve(corpus.size());
    labels.reserve(corpus.size());
    for (const nb::Document& doc : corpus.documents()) {
        docs.push_back(nb::preprocess(doc, stopwords).tokens);
        labels.push_back(doc.label.value());
    }
}

void require_dataset(const nb::RunConfig& config) {
    if (!config.has_dataset) throw nb::ConfigError("config: 'dataset' is required");
}

fs::path out_path(const nb::RunConfig& config, const std::string& suffix) {
    fs::create_directories(config.out_dir);
    return fs::path(config.out_dir) / (config.run_id + suffix);
}

void print_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::fputs(buf.str().c_str(), stdout);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOpts {
    std::string canonical;
    std::vector<std::string> isot;
    std::uint64_t synthetic = 0;
    double separation = 1.0;
    std::uint64_t seed = 0;
    std::string label_space = "veracity";
};

int run_stats(const StatsOpts& opts) {
    int sources = (!opts.canonical.empty() ? 1 : 0) + (!opts.isot.empty() ? 1 : 0) +
                  (opts.synthetic > 0 ? 1 : 0);
    if (sources != 1) {
        throw nb::ConfigError("stats needs exactly one of --canonical, --isot, --synthetic");
    }
    if (opts.label_space != "veracity" && opts.label_space != "subjectivity") {
        throw nb::ConfigError("label space must be veracity or subjectivity");
    }

    nb::DataSource source;
    if (!opts.canonical.empty()) {
        source.kind = "canonical";
        source.path = opts.canonical;
        source.name = fs::path(opts.canonical).stem().string();
    } else if (!opts.isot.empty()) {
        source.kind = "isot";
        source.fake_path = opts.isot[0];
        source.true_path = opts.isot[1];
        source.name = "isot";
    } else {
        source.kind = "synthetic";
        source.n_per_class = opts.synthetic;
        source.separation = opts.separation;
        source.seed = opts.seed;
        source.name = "synthetic";
    }

    const nb::LabelSpace space = opts.label_space == "subjectivity"
                                     ? nb::LabelSpace::subjectivity()
                                     : nb::LabelSpace::veracity();
    const nb::LabeledCorpus corpus = nb::load_source(source, space);
    const nb::DatasetStats stats = nb::stats(corpus);

    std::printf("dataset: %s\n", source.name.c_str());
    std::printf("total: %zu\n", stats.total);
    const auto& names = corpus.label_space().names();
    std::printf("%s: %zu\n", lower(names[0]).c_str(), stats.per_label[0]);
    std::printf("%s: %zu\n", lower(names[1]).c_str(), stats.per_label[1]);
    std::printf("skipped_rows: %zu\n", stats.skipped_rows);
    std::printf("mean_body_tokens: %.2f\n", stats.mean_body_tokens);
    std::printf("median_body_tokens: %.2f\n", stats.median_body_tokens);
    std::printf("vocabulary_estimate: %zu\n", stats.vocabulary_estimate);
    return 0;
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

int run_preprocess(const std::string& config_path, const Overrides& overrides) {
    const nb::RunConfig config = load_config(config_path, overrides);
    require_dataset(config);
    const nb::LabelSpace space = nb::label_space_of(config);
    const nb::LabeledCorpus corpus = nb::load_source(config.dataset, space);
    const nb::StopwordList stopwords = stopwords_of(config);

    const fs::path tokens_path = out_path(config, "_tokens.tsv");
    std::ofstream out(tokens_path, std::ios::binary);
    if (!out) throw nb::DataError("cannot write: " + tokens_path.string());
    for (const nb::Document& doc : corpus.documents()) {
        const nb::CleanDocument clean = nb::preprocess(doc, stopwords);
        out << doc.id << '\t';
        for (std::size_t i = 0; i < clean.tokens.size(); ++i) {
            if (i > 0) out << ' ';
            out << clean.tokens[i];
        }
        out << '\n';
    }
    nb::save_run_config(config, out_path(config, "_config.json").string());

    std::fprintf(stderr, "preprocessed %zu documents (%zu source rows skipped) -> %s\n",
                 corpus.size(), corpus.skipped_rows(), tokens_path.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void write_train_log(const nb::RunConfig& config, nb::TextClassifier& model,
                     std::size_t train_docs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nb::DataError("cannot write training log: " + path);
    out << "kind=" << model.kind() << '\n';
    out << "train_documents=" << train_docs << '\n';
    char buf[64];
    if (auto* lr = dynamic_cast<nb::TfidfLogRegClassifier*>(&model)) {
        const auto& trace = lr->model().loss_trace();
        out << "epochs=" << trace.size() << '\n';
        if (!trace.empty()) {
            std::snprintf(buf, sizeof buf, "%.6f", trace.front());
            out << "initial_loss=" << buf << '\n';
            std::snprintf(buf, sizeof buf, "%.6f", trace.back());
            out << "final_loss=" << buf << '\n';
        }
    } else if (auto* net = dynamic_cast<nb::NeuralTextClassifier*>(&model)) {
        const nb::TrainTrace& trace = net->trace();
        for (std::size_t e = 0; e < trace.train_loss.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%.6f", trace.train_loss[e]);
            out << "epoch=" << e << " train_loss=" << buf;
            std::snprintf(buf, sizeof buf, "%.6f", trace.val_loss[e]);
            out << " val_loss=" << buf << '\n';
        }
        out << "best_epoch=" << trace.best_epoch << '\n';
        out << "epochs_run=" << trace.epochs_run << '\n';
    } else if (auto* forest = dynamic_cast<nb::TfidfForestClassifier*>(&model)) {
        out << "trees=" << forest->model().trees().size() << '\n';
    }
}

int run_train(const std::string& config_path, const Overrides& overrides) {
    const nb::RunConfig config = load_config(config_path, overrides);
    require_dataset(config);
    const nb::LabelSpace space = nb::label_space_of(config);
    const nb::LabeledCorpus corpus = nb::load_source(config.dataset, space);
    const nb::SplitResult parts = nb::split(corpus, config.split);
    const nb::StopwordList stopwords = stopwords_of(config);

    std::unique_ptr<nb::TextClassifier> model = nb::make_classifier(config.model, space);
    std::vector<nb::TokenList> docs;
    std::vector<int> labels;
    corpus_tokens(parts.train, stopwords, docs, labels);
    model->fit(docs, labels);

    const fs::path model_path = out_path(config, ".model");
    nb::ModelCodec::save(*model, model_path.string());
    write_train_log(config, *model, parts.train.size(), out_path(config, "_train.log").string());
    nb::save_run_config(config, out_path(config, "_config.json").string());

    std::fprintf(stderr, "trained %s on %zu documents -> %s\n", model->kind().c_str(),
                 parts.train.size(), model_path.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval / crosseval
// ---------------------------------------------------------------------------

struct EvalOpts {
    std::string config_path;
    std::string model_path;
    std::string train_set = "unknown";
    std::string render = "csv";
    bool full = false;
    Overrides overrides;
};

int run_eval(const EvalOpts& opts, bool cross) {
    const nb::RunConfig config = load_config(opts.config_path, opts.overrides);
    require_dataset(config);
    std::unique_ptr<nb::TextClassifier> model = nb::ModelCodec::load(opts.model_path);
    if (nb::label_space_of(config).kind() != model->label_space().kind()) {
        throw nb::DataError("label-space mismatch between model and dataset");
    }

    const nb::LabeledCorpus corpus = nb::load_source(config.dataset, model->label_space());
    const nb::StopwordList stopwords = stopwords_of(config);

    std::map<std::string, std::string> metadata;
    metadata["run_id"] = config.run_id;
    metadata["train_set"] = opts.train_set;
    metadata["mode"] = "one_step";

    nb::EvaluationReport report = [&] {
        if (cross || opts.full) {
            metadata["test_set"] = config.dataset.name;
            return cross ? nb::cross_evaluate(*model, corpus, stopwords, config.threads, metadata)
                         : nb::evaluate(*model, corpus, stopwords, config.threads, metadata);
        }
        const nb::SplitResult parts = nb::split(corpus, config.split);
        metadata["test_set"] = config.dataset.name + ":holdout";
        return nb::evaluate(*model, parts.test, stopwords, config.threads, metadata);
    }();

    const nb::RenderedReport rendered =
        nb::render_report(report, config.out_dir, config.run_id);
    nb::save_run_config(config, out_path(config, "_config.json").string());
    if (opts.render == "table") print_file(rendered.table_path);

    std::fprintf(stderr, "evaluated %s on %s: macro f1 %.4f -> %s\n", model->kind().c_str(),
                 metadata["test_set"].c_str(), report.metric_set.macro.f1,
                 rendered.metrics_csv_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

int run_pipeline(const std::string& config_path, const Overrides& overrides) {
    const nb::RunConfig config = load_config(config_path, overrides);
    require_dataset(config);
    if (!config.has_factop) {
        throw nb::ConfigError("config: pipeline runs need a 'factop' dataset");
    }
    if (config.label_space != "veracity") {
        throw nb::ConfigError("config: pipeline runs use the veracity label space");
    }

    const nb::LabeledCorpus corpus = nb::load_source(config.dataset, nb::LabelSpace::veracity());
    const nb::LabeledCorpus factop =
        nb::load_source(config.factop, nb::LabelSpace::subjectivity());
    const nb::SplitResult parts = nb::split(corpus, config.split);
    const nb::StopwordList stopwords = stopwords_of(config);

    nb::PipelineTrainConfig train_config;
    train_config.filter = config.pipeline.filter;
    train_config.veracity = config.model;
    train_config.tau = config.pipeline.tau;
    train_config.filter_split = config.pipeline.filter_split;
    train_config.use_stopwords = config.use_stopwords;
    train_config.threads = config.threads;
    nb::TwoStepPipeline two_step = nb::train_two_step(parts.train, factop, train_config);

    std::unique_ptr<nb::TextClassifier> one_step =
        nb::make_classifier(config.model, nb::LabelSpace::veracity());
    std::vector<nb::TokenList> docs;
    std::vector<int> labels;
    corpus_tokens(parts.train, stopwords, docs, labels);
    one_step->fit(docs, labels);

    const std::string train_name = config.dataset.name;
    const std::string test_name = config.dataset.name + ":holdout";

    std::map<std::string, std::string> metadata;
    metadata["run_id"] = config.run_id;
    metadata["train_set"] = train_name;
    metadata["test_set"] = test_name;
    metadata["mode"] = "one_step";
    nb::EvaluationReport one_report =
        nb::evaluate(*one_step, parts.test, stopwords, config.threads, metadata);

    nb::EvaluationReport two_report = nb::evaluate_pipeline(
        two_step, parts.test, config.pipeline.exclude_opinion, config.threads);
    two_report.metadata["run_id"] = config.run_id;
    two_report.metadata["train_set"] = train_name;
    two_report.metadata["test_set"] = test_name;

    const nb::ComparisonReport comparison = nb::compare_two_step(one_report, two_report);

    const std::string manifest =
        nb::save_pipeline(two_step, config.out_dir, config.run_id);
    nb::render_report(one_report, config.out_dir, config.run_id + "_one_step");
    nb::render_report(two_report, config.out_dir, config.run_id + "_two_step");
    const nb::RenderedComparison rendered =
        nb::render_comparison(comparison, config.out_dir, config.run_id);
    nb::save_run_config(config, out_path(config, "_config.json").string());

    std::fprintf(stderr,
                 "pipeline: filter holdout accuracy %.4f, removed %zu/%zu training documents\n",
                 two_step.provenance.filter_holdout_accuracy,
                 two_step.provenance.removed_by_filter, parts.train.size());
    std::fprintf(stderr, "pipeline: manifest %s, comparison %s\n", manifest.c_str(),
                 rendered.csv_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// report (re-render from stored CSVs)
// ---------------------------------------------------------------------------

struct ReportOpts {
    std::string metrics_path;
    std::string confusion_path;
    std::string out_dir = "out";
    std::string run_id = "report";
    std::string render = "csv";
};

int run_report(const ReportOpts& opts) {
    std::ifstream metrics_in(opts.metrics_path);
    if (!metrics_in) throw nb::DataError("cannot read metrics csv: " + opts.metrics_path);
    nb::CsvReader reader(metrics_in);
    auto header = reader.next();
    if (!header || header->empty() || (*header)[0] != "run_id") {
        throw nb::DataError("not a metrics csv: " + opts.metrics_path);
    }

    struct Row {
        std::string cls;
        nb::ClassMetrics m;
    };
    std::vector<Row> rows;
    std::map<std::string, std::string> metadata;
    while (auto record = reader.next()) {
        if (record->size() != 10) throw nb::DataError("malformed metrics csv row");
        metadata["train_set"] = (*record)[1];
        metadata["test_set"] = (*record)[2];
        metadata["model"] = (*record)[3];
        metadata["mode"] = (*record)[4];
        Row row;
        row.cls = (*record)[5];
        row.m.accuracy = std::strtod((*record)[6].c_str(), nullptr);
        row.m.precision = std::strtod((*record)[7].c_str(), nullptr);
        row.m.recall = std::strtod((*record)[8].c_str(), nullptr);
        row.m.f1 = std::strtod((*record)[9].c_str(), nullptr);
        rows.push_back(std::move(row));
    }
    if (rows.size() != 3) throw nb::DataError("metrics csv must contain three class rows");

    nb::EvaluationReport report;
    const std::string& positive = rows[0].cls;
    if (positive == "fake" || positive == "real") {
        report.label_space = nb::LabelSpace::veracity();
    } else if (positive == "fact" || positive == "opinion") {
        report.label_space = nb::LabelSpace::subjectivity();
    } else {
        throw nb::DataError("unknown class name in metrics csv: " + positive);
    }
    for (int i = 0; i < 2; ++i) {
        if (lower(report.label_space.names()[i]) == positive) report.label_space.set_positive(i);
    }
    report.metric_set.positive = rows[0].m;
    report.metric_set.negative = rows[1].m;
    report.metric_set.macro = rows[2].m;
    report.metadata = std::move(metadata);

    std::ifstream confusion_in(opts.confusion_path);
    if (!confusion_in) throw nb::DataError("cannot read confusion csv: " + opts.confusion_path);
    nb::CsvReader creader(confusion_in);
    auto chead = creader.next();
    auto row_pos = creader.next();
    auto row_neg = creader.next();
    if (!chead || !row_pos || !row_neg || row_pos->size() != 3 || row_neg->size() != 3) {
        throw nb::DataError("not a confusion csv: " + opts.confusion_path);
    }
    report.confusion.tp = std::stoull((*row_pos)[1]);
    report.confusion.fn = std::stoull((*row_pos)[2]);
    report.confusion.fp = std::stoull((*row_neg)[1]);
    report.confusion.tn = std::stoull((*row_neg)[2]);

    const nb::RenderedReport rendered = nb::render_report(report, opts.out_dir, opts.run_id);
    if (opts.render == "table") print_file(rendered.table_path);
    std::fprintf(stderr, "re-rendered report -> %s\n", rendered.table_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"newsbench: fake news classification workbench"};
    app.require_subcommand(1);
    int rc = 0;

    StatsOpts stats_opts;
    CLI::App* stats = app.add_subcommand("stats", "Print dataset statistics");
    stats->add_option("--canonical", stats_opts.canonical, "Canonical CSV (id,title,text,label)");
    stats->add_option("--isot", stats_opts.isot, "ISOT pair: fake CSV then real CSV")
        ->expected(2);
    stats->add_option("--synthetic", stats_opts.synthetic, "Synthetic documents per class");
    stats->add_option("--separation", stats_opts.separation, "Synthetic corpus separation");
    stats->add_option("--seed", stats_opts.seed, "Synthetic corpus seed");
    stats->add_option("--label-space", stats_opts.label_space, "veracity | subjectivity");
    stats->callback([&] { rc = run_stats(stats_opts); });

    std::string pre_config;
    Overrides pre_overrides;
    CLI::App* pre = app.add_subcommand("preprocess", "Clean and tokenize a dataset");
    pre->add_option("--config", pre_config, "Run config JSON")->required();
    add_override_flags(pre, pre_overrides);
    pre->callback([&] { rc = run_preprocess(pre_config, pre_overrides); });

    std::string train_config;
    Overrides train_overrides;
    CLI::App* train = app.add_subcommand("train", "Train a classifier on the train split");
    train->add_option("--config", train_config, "Run config JSON")->required();
    add_override_flags(train, train_overrides);
    train->callback([&] { rc = run_train(train_config, train_overrides); });

    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved model on the test split");
    eval->add_option("--config", eval_opts.config_path, "Run config JSON")->required();
    eval->add_option("--model", eval_opts.model_path, "Model file")->required();
    eval->add_option("--train-set", eval_opts.train_set, "Training-set name for the report");
    eval->add_option("--render", eval_opts.render, "csv | table")
        ->check(CLI::IsMember({"csv", "table"}));
    eval->add_flag("--full", eval_opts.full, "Evaluate on the whole dataset, not the test split");
    add_override_flags(eval, eval_opts.overrides);
    eval->callback([&] { rc = run_eval(eval_opts, false); });

    EvalOpts cross_opts;
    CLI::App* crosseval =
        app.add_subcommand("crosseval", "Evaluate a saved model on a different dataset");
    crosseval->add_option("--config", cross_opts.config_path, "Run config JSON")->required();
    crosseval->add_option("--model", cross_opts.model_path, "Model file")->required();
    crosseval->add_option("--train-set", cross_opts.train_set, "Training-set name for the report");
    crosseval->add_option("--render", cross_opts.render, "csv | table")
        ->check(CLI::IsMember({"csv", "table"}));
    add_override_flags(crosseval, cross_opts.overrides);
    crosseval->callback([&] { rc = run_eval(cross_opts, true); });

    std::string pipe_config;
    Overrides pipe_overrides;
    CLI::App* pipe =
        app.add_subcommand("pipeline", "Train and evaluate the two-step pipeline");
    pipe->add_option("--config", pipe_config, "Run config JSON")->required();
    add_override_flags(pipe, pipe_overrides);
    pipe->callback([&] { rc = run_pipeline(pipe_config, pipe_overrides); });

    ReportOpts report_opts;
    CLI::App* report = app.add_subcommand("report", "Re-render report files from stored CSVs");
    report->add_option("--metrics", report_opts.metrics_path, "Metrics CSV")->required();
    report->add_option("--confusion", report_opts.confusion_path, "Confusion CSV")->required();
    report->add_option("--out-dir", report_opts.out_dir, "Output directory");
    report->add_option("--run-id", report_opts.run_id, "Run id for the rendered files");
    report->add_option("--render", report_opts.render, "csv | table")
        ->check(CLI::IsMember({"csv", "table"}));
    report->callback([&] { rc = run_report(report_opts); });

    try {
        app.parse(argc, argv);
        return rc;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const nb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const nb::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const nb::TrainError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
