#pragma once

#include <string>

#include "newsbench/eval.hpp"

namespace newsbench {

// Paths of the three files render_report writes.
struct RenderedReport {
    std::string table_path;          // <run_id>_table.txt
    std::string metrics_csv_path;    // <run_id>_metrics.csv
    std::string confusion_csv_path;  // <run_id>_confusion.csv
};

// Renders one evaluation report into out_dir: a human-readable table, a
// metrics CSV (schema: run_id,train_set,test_set,model,mode,class,accuracy,
// precision,recall,f1 with one row per class plus macro) and a confusion CSV
// (rows = actual, columns = predicted). Byte-stable given identical inputs.
RenderedReport render_report(const EvaluationReport& report, const std::string& out_dir,
                             const std::string& run_id);

struct RenderedComparison {
    std::string table_path;  // <run_id>_comparison_table.txt
    std::string csv_path;    // <run_id>_comparison.csv
};

// Renders a one-step vs two-step comparison: a table with Two Step / One
// Step column pairs plus delta and relative-change columns, and a CSV with
// one row per metric.
RenderedComparison render_comparison(const ComparisonReport& comparison,
                                     const std::string& out_dir, const std::string& run_id);

}  // namespace newsbench
