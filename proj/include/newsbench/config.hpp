#pragma once

#include <cstdint>
#include <string>

#include "newsbench/corpus.hpp"
#include "newsbench/factory.hpp"

namespace newsbench {

// Where a corpus comes from. kind selects which fields matter:
//   canonical: path (CSV id,title,text,label)
//   isot:      fake_path + true_path (title,text,subject,date CSVs)
//   synthetic: n_per_class, separation, seed
struct DataSource {
    std::string kind = "canonical";
    std::string name;  // dataset label used in report metadata
    std::string path;
    std::string fake_path;
    std::string true_path;
    std::size_t n_per_class = 200;
    double separation = 1.0;
    std::uint64_t seed = 0;

    bool configured() const { return !kind.empty(); }
};

struct PipelineSettings {
    double tau = 0.5;
    bool exclude_opinion = false;
    ClassifierSpec filter;  // defaults to tf-idf logistic regression
    SplitSpec filter_split;
};

// One fully-resolved run description. parse_run_config rejects unknown keys;
// resolve_run_config fills the derived per-component seeds so the persisted
// form reproduces the run exactly.
struct RunConfig {
    std::string run_id = "run";
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string label_space = "veracity";  // veracity | subjectivity
    bool use_stopwords = true;

    DataSource dataset;
    DataSource factop;  // subjectivity corpus for pipeline runs
    bool has_dataset = false;
    bool has_factop = false;

    SplitSpec split;
    ClassifierSpec model;
    PipelineSettings pipeline;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Serializes every field explicitly (round-trips through parse_run_config).
std::string run_config_text(const RunConfig& config);
void save_run_config(const RunConfig& config, const std::string& path);

LabelSpace label_space_of(const RunConfig& config);
LabeledCorpus load_source(const DataSource& source, const LabelSpace& space);

}  // namespace newsbench
