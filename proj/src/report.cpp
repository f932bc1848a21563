#include "newsbench/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "newsbench/csv.hpp"
#include "newsbench/errors.hpp"

namespace newsbench {

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string fmt4_signed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.4f", v);
    return buf;
}

std::string fmt2_signed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f", v);
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string meta_or(const EvaluationReport& report, const std::string& key,
                    const std::string& fallback) {
    auto it = report.metadata.find(key);
    return it != report.metadata.end() ? it->second : fallback;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report file: " + path.string());
    return out;
}

void pad_to(std::string& s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
}

std::string row(std::initializer_list<std::pair<std::string, std::size_t>> cells) {
    std::string line;
    for (const auto& [text, width] : cells) {
        std::string cell = text;
        pad_to(cell, width);
        line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line;
}

}  // namespace

RenderedReport render_report(const EvaluationReport& report, const std::string& out_dir,
                             const std::string& run_id) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const std::string train_set = meta_or(report, "train_set", "unknown");
    const std::string test_set = meta_or(report, "test_set", "unknown");
    const std::string model = meta_or(report, "model", "unknown");
    const std::string mode = meta_or(report, "mode", "one_step");

    const std::string pos_name = lower(report.label_space.names()[report.label_space.positive()]);
    const std::string neg_name = lower(report.label_space.names()[report.label_space.negative()]);

    RenderedReport rendered;

    // --- metrics CSV ---------------------------------------------------------
    {
        fs::path path = fs::path(out_dir) / (run_id + "_metrics.csv");
        auto out = open_out(path);
        out << "run_id,train_set,test_set,model,mode,class,accuracy,precision,recall,f1\n";
        auto emit = [&](const std::string& cls, const ClassMetrics& m) {
            out << csv_escape(run_id) << ',' << csv_escape(train_set) << ','
                << csv_escape(test_set) << ',' << csv_escape(model) << ',' << csv_escape(mode)
                << ',' << csv_escape(cls) << ',' << fmt4(m.accuracy) << ',' << fmt4(m.precision)
                << ',' << fmt4(m.recall) << ',' << fmt4(m.f1) << '\n';
        };
        emit(pos_name, report.metric_set.positive);
        emit(neg_name, report.metric_set.negative);
        emit("macro", report.metric_set.macro);
        rendered.metrics_csv_path = path.string();
    }

    // --- confusion CSV -------------------------------------------------------
    {
        fs::path path = fs::path(out_dir) / (run_id + "_confusion.csv");
        auto out = open_out(path);
        const ConfusionMatrix& c = report.confusion;
        out << "actual\\predicted," << pos_name << ',' << neg_name << '\n';
        out << pos_name << ',' << c.tp << ',' << c.fn << '\n';
        out << neg_name << ',' << c.fp << ',' << c.tn << '\n';
        rendered.confusion_csv_path = path.string();
    }

    // --- human-readable table ------------------------------------------------
    {
        fs::path path = fs::path(out_dir) / (run_id + "_table.txt");
        auto out = open_out(path);
        out << "Run " << run_id << ": model " << model << ", mode " << mode << '\n';
        out << "Train set: " << train_set << "   Test set: " << test_set << '\n';
        out << '\n';
        const std::size_t c0 = 10, cw = 11;
        out << row({{"Class", c0},
                    {"Accuracy", cw},
                    {"Precision", cw},
                    {"Recall", cw},
                    {"F1", cw}})
            << '\n';
        auto emit = [&](const std::string& cls, const ClassMetrics& m) {
            out << row({{cls, c0},
                        {fmt4(m.accuracy), cw},
                        {fmt4(m.precision), cw},
                        {fmt4(m.recall), cw},
                        {fmt4(m.f1), cw}})
                << '\n';
        };
        emit(pos_name, report.metric_set.positive);
        emit(neg_name, report.metric_set.negative);
        emit("macro", report.metric_set.macro);
        out << '\n';
        out << "Confusion matrix (rows = actual, columns = predicted)\n";
        const ConfusionMatrix& c = report.confusion;
        out << row({{"", c0}, {pos_name, cw}, {neg_name, cw}}) << '\n';
        out << row({{pos_name, c0}, {std::to_string(c.tp), cw}, {std::to_string(c.fn), cw}})
            << '\n';
        out << row({{neg_name, c0}, {std::to_string(c.fp), cw}, {std::to_string(c.tn), cw}})
            << '\n';
        out << '\n';
        for (const auto& [key, value] : report.metadata) {
            out << "# " << key << " = " << value << '\n';
        }
        out << "Note: precision, recall and f1 are reported as 0.0 when their denominator is 0.\n";
        rendered.table_path = path.string();
    }

    return rendered;
}

RenderedComparison render_comparison(const ComparisonReport& comparison,
                                     const std::string& out_dir, const std::string& run_id) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    RenderedComparison rendered;

    struct RowSpec {
        const char* name;
        const MetricDelta* d;
    };
    const RowSpec rows[] = {
        {"accuracy", &comparison.accuracy},
        {"precision", &comparison.precision},
        {"recall", &comparison.recall},
        {"f1", &comparison.f1},
    };

    {
        fs::path path = fs::path(out_dir) / (run_id + "_comparison.csv");
        auto out = open_out(path);
        out << "run_id,train_set,test_set,model,metric,two_step,one_step,delta,relative_pct\n";
        for (const RowSpec& r : rows) {
            out << csv_escape(run_id) << ',' << csv_escape(comparison.train_set) << ','
                << csv_escape(comparison.test_set) << ',' << csv_escape(comparison.model) << ','
                << r.name << ',' << fmt4(r.d->two_step) << ',' << fmt4(r.d->one_step) << ','
                << fmt4_signed(r.d->delta) << ',' << fmt2_signed(r.d->relative_pct) << '\n';
        }
        rendered.csv_path = path.string();
    }

    {
        fs::path path = fs::path(out_dir) / (run_id + "_comparison_table.txt");
        auto out = open_out(path);
        out << "Run " << run_id << ": two-step vs one-step, model " << comparison.model << '\n';
        out << "Train set: " << comparison.train_set << "   Test set: " << comparison.test_set
            << '\n';
        out << '\n';
        const std::size_t c0 = 11, cw = 11;
        out << row({{"Metric", c0},
                    {"Two Step", cw},
                    {"One Step", cw},
                    {"Delta", cw},
                    {"Rel %", cw}})
            << '\n';
        for (const RowSpec& r : rows) {
            std::string name(1, static_cast<char>(std::toupper(r.name[0])));
            name += r.name + 1;
            out << row({{name, c0},
                        {fmt4(r.d->two_step), cw},
                        {fmt4(r.d->one_step), cw},
                        {fmt4_signed(r.d->delta), cw},
                        {fmt2_signed(r.d->relative_pct), cw}})
                << '\n';
        }
        out << '\n';
        out << "Delta = two-step minus one-step; Rel % = 100 * delta / one-step value.\n";
        rendered.table_path = path.string();
    }

    return rendered;
}

}  // namespace newsbench
