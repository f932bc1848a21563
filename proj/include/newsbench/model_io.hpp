#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "newsbench/classifier.hpp"
#include "newsbench/pipeline.hpp"

namespace newsbench {

// Versioned binary container for trained classifiers (layout in
// docs/FORMATS.md): magic + version, model kind, label space, a key=value
// meta block with the hyperparameters needed to rebuild the object, the
// vocabulary (hash + embedded text form), and named flat double sections
// holding every parameter array. Writing is byte-deterministic.
class ModelCodec {
public:
    static void save(TextClassifier& model, std::ostream& out);
    static void save(TextClassifier& model, const std::string& path);

    static std::unique_ptr<TextClassifier> load(std::istream& in);
    static std::unique_ptr<TextClassifier> load(const std::string& path);
};

// Writes <run_id>_filter.model, <run_id>_veracity.model and
// <run_id>_pipeline.json into dir; returns the manifest path. The manifest
// references the two model files by name and records tau plus the provenance
// counts.
std::string save_pipeline(TwoStepPipeline& pipeline, const std::string& dir,
                          const std::string& run_id);

TwoStepPipeline load_pipeline(const std::string& manifest_path);

}  // namespace newsbench
