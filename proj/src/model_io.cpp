#include "newsbench/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "newsbench/baselines.hpp"
#include "newsbench/errors.hpp"
#include "newsbench/factory.hpp"
#include "newsbench/neural/neural_classifier.hpp"

#include "json.hpp"

namespace newsbench {

namespace {

constexpr char kMagic[] = "NBMDL1\n";  // 7 bytes
constexpr std::uint32_t kVersion = 1;

// --- little-endian primitives ----------------------------------------------

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("truncated model file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string read_str(std::istream& in) {
    const std::uint32_t n = read_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw DataError("truncated model file");
    return s;
}

// --- meta block -------------------------------------------------------------

struct MetaWriter {
    std::ostringstream out;
    void put(const std::string& key, const std::string& value) { out << key << '=' << value << '\n'; }
    void put(const std::string& key, std::uint64_t value) { put(key, std::to_string(value)); }
    void put(const std::string& key, int value) { put(key, std::to_string(value)); }
    void put(const std::string& key, double value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        put(key, std::string(buf));
    }
    std::string str() const { return out.str(); }
};

struct MetaReader {
    std::map<std::string, std::string> kv;

    explicit MetaReader(const std::string& block) {
        std::istringstream in(block);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw DataError("malformed model meta line: " + line);
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }

    const std::string& str(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError("model meta missing key: " + key);
        return it->second;
    }
    std::uint64_t u64(const std::string& key) const { return std::stoull(str(key)); }
    std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }
    int integer(const std::string& key) const { return std::stoi(str(key)); }
    double real(const std::string& key) const { return std::strtod(str(key).c_str(), nullptr); }
};

// --- sections ----------------------------------------------------------------

void write_section(std::ostream& out, const std::string& name, const double* data,
                   std::size_t count) {
    write_str(out, name);
    write_u64(out, count);
    for (std::size_t i = 0; i < count; ++i) write_f64(out, data[i]);
}

void write_section(std::ostream& out, const std::string& name, const std::vector<double>& data) {
    write_section(out, name, data.data(), data.size());
}

struct Section {
    std::string name;
    std::vector<double> data;
};

std::vector<Section> read_sections(std::istream& in) {
    const std::uint32_t count = read_u32(in);
    std::vector<Section> sections(count);
    for (auto& section : sections) {
        section.name = read_str(in);
        const std::uint64_t n = read_u64(in);
        section.data.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) section.data[i] = read_f64(in);
    }
    return sections;
}

const Section& find_section(const std::vector<Section>& sections, const std::string& name) {
    for (const Section& section : sections) {
        if (section.name == name) return section;
    }
    throw DataError("model file missing section: " + name);
}

// --- label space / vocabulary ------------------------------------------------

std::string label_kind_name(const LabelSpace& space) {
    return space.kind() == LabelKind::Veracity ? "veracity" : "subjectivity";
}

LabelSpace parse_label_space(const std::string& kind, std::uint32_t positive) {
    LabelSpace space = kind == "veracity"      ? LabelSpace::veracity()
                       : kind == "subjectivity" ? LabelSpace::subjectivity()
                                                : throw DataError("unknown label space: " + kind);
    space.set_positive(static_cast<int>(positive));
    return space;
}

std::string vocab_text(const Vocabulary& vocab) {
    std::ostringstream out;
    vocab.save(out);
    return out.str();
}

Vocabulary vocab_from_text(const std::string& text) {
    std::istringstream in(text);
    return Vocabulary::load(in);
}

// --- per-kind payloads --------------------------------------------------------

void write_container(std::ostream& out, const std::string& kind, const LabelSpace& space,
                     const std::string& meta, const Vocabulary& vocab,
                     const std::vector<Section>& sections) {
    out.write(kMagic, 7);
    write_u32(out, kVersion);
    write_str(out, kind);
    write_str(out, label_kind_name(space));
    write_u32(out, static_cast<std::uint32_t>(space.positive()));
    write_str(out, meta);
    write_u64(out, vocab.hash());
    write_str(out, vocab_text(vocab));
    write_u32(out, static_cast<std::uint32_t>(sections.size()));
    for (const Section& section : sections) write_section(out, section.name, section.data);
}

std::vector<Section> tfidf_sections(const TfidfModel& tfidf) {
    std::vector<Section> sections;
    const std::size_t v = tfidf.vocabulary().size();
    Section idf{"idf", std::vector<double>(v)};
    for (std::size_t i = 0; i < v; ++i) idf.data[i] = tfidf.idf(i);
    sections.push_back(std::move(idf));
    return sections;
}

std::vector<double> flatten_tree(const DecisionTree& tree) {
    std::vector<double> flat;
    flat.reserve(tree.nodes.size() * 5);
    for (const TreeNode& node : tree.nodes) {
        flat.push_back(static_cast<double>(node.feature));
        flat.push_back(node.threshold);
        flat.push_back(static_cast<double>(node.left));
        flat.push_back(static_cast<double>(node.right));
        flat.push_back(static_cast<double>(node.leaf_label));
    }
    return flat;
}

DecisionTree unflatten_tree(const std::vector<double>& flat) {
    if (flat.size() % 5 != 0) throw DataError("malformed tree section");
    DecisionTree tree;
    tree.nodes.resize(flat.size() / 5);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        TreeNode& node = tree.nodes[i];
        node.feature = static_cast<std::uint32_t>(flat[i * 5 + 0]);
        node.threshold = flat[i * 5 + 1];
        node.left = static_cast<std::int32_t>(flat[i * 5 + 2]);
        node.right = static_cast<std::int32_t>(flat[i * 5 + 3]);
        node.leaf_label = static_cast<std::int32_t>(flat[i * 5 + 4]);
    }
    return tree;
}

}  // namespace

// ---------------------------------------------------------------------------
// save
// ---------------------------------------------------------------------------

void ModelCodec::save(TextClassifier& model, std::ostream& out) {
    const std::string kind = model.kind();

    if (kind == "logreg") {
        auto& m = dynamic_cast<TfidfLogRegClassifier&>(model);
        MetaWriter meta;
        meta.put("max_vocab", static_cast<std::uint64_t>(m.features_.max_vocab));
        meta.put("min_df", static_cast<std::uint64_t>(m.features_.min_df));
        meta.put("lr", m.config_.lr);
        meta.put("epochs", static_cast<std::uint64_t>(m.config_.epochs));
        meta.put("l2_lambda", m.config_.l2_lambda);
        meta.put("seed", m.config_.seed);
        std::vector<Section> sections = tfidf_sections(m.tfidf_);
        sections.push_back({"weights", m.model_.weights_});
        sections.push_back({"bias", {m.model_.bias_}});
        sections.push_back({"loss_trace", m.model_.loss_trace_});
        write_container(out, kind, m.space_, meta.str(), m.tfidf_.vocabulary(), sections);
        return;
    }

    if (kind == "nb") {
        auto& m = dynamic_cast<NaiveBayesClassifier&>(model);
        MetaWriter meta;
        meta.put("max_vocab", static_cast<std::uint64_t>(m.features_.max_vocab));
        meta.put("min_df", static_cast<std::uint64_t>(m.features_.min_df));
        meta.put("alpha", m.alpha_);
        std::vector<Section> sections;
        sections.push_back({"log_prior", {m.model_.log_prior_[0], m.model_.log_prior_[1]}});
        sections.push_back({"log_likelihood_0", m.model_.log_likelihood_[0]});
        sections.push_back({"log_likelihood_1", m.model_.log_likelihood_[1]});
        write_container(out, kind, m.space_, meta.str(), m.vocab_, sections);
        return;
    }

    if (kind == "forest") {
        auto& m = dynamic_cast<TfidfForestClassifier&>(model);
        MetaWriter meta;
        meta.put("max_vocab", static_cast<std::uint64_t>(m.features_.max_vocab));
        meta.put("min_df", static_cast<std::uint64_t>(m.features_.min_df));
        meta.put("trees", static_cast<std::uint64_t>(m.config_.trees));
        meta.put("feature_fraction", m.config_.feature_fraction);
        meta.put("max_depth", static_cast<std::uint64_t>(m.config_.max_depth));
        meta.put("min_split", static_cast<std::uint64_t>(m.config_.min_split));
        meta.put("seed", m.config_.seed);
        std::vector<Section> sections = tfidf_sections(m.tfidf_);
        for (std::size_t t = 0; t < m.model_.trees_.size(); ++t) {
            sections.push_back({"tree" + std::to_string(t), flatten_tree(m.model_.trees_[t])});
        }
        write_container(out, kind, m.space_, meta.str(), m.tfidf_.vocabulary(), sections);
        return;
    }

    if (is_neural_kind(kind)) {
        auto& m = dynamic_cast<NeuralTextClassifier&>(model);
        if (!m.net_) throw DataError("cannot save an unfitted neural classifier");
        const NeuralClassifierConfig& c = m.config_;
        MetaWriter meta;
        meta.put("arch", c.arch);
        meta.put("max_vocab", static_cast<std::uint64_t>(c.max_vocab));
        meta.put("min_df", static_cast<std::uint64_t>(c.min_df));
        meta.put("max_len", static_cast<std::uint64_t>(c.max_len));
        meta.put("d_model", static_cast<std::uint64_t>(c.d_model));
        meta.put("heads", static_cast<std::uint64_t>(c.heads));
        meta.put("layers", static_cast<std::uint64_t>(c.layers));
        meta.put("d_ff", static_cast<std::uint64_t>(c.d_ff));
        meta.put("dropout", c.dropout);
        meta.put("rel_k", static_cast<std::uint64_t>(c.rel_k));
        meta.put("d_emb", static_cast<std::uint64_t>(c.d_emb));
        meta.put("hidden", static_cast<std::uint64_t>(c.hidden));
        meta.put("val_fraction", c.val_fraction);
        meta.put("seed", c.seed);
        meta.put("train.epochs", static_cast<std::uint64_t>(c.train.epochs));
        meta.put("train.batch_size", static_cast<std::uint64_t>(c.train.batch_size));
        meta.put("train.patience", static_cast<std::uint64_t>(c.train.patience));
        meta.put("train.seed", c.train.seed);
        meta.put("opt.lr", c.train.opt.lr);
        meta.put("opt.beta1", c.train.opt.beta1);
        meta.put("opt.beta2", c.train.opt.beta2);
        meta.put("opt.eps", c.train.opt.eps);
        meta.put("opt.weight_decay", c.train.opt.weight_decay);
        std::vector<Section> sections;
        for (const Tensor* tensor : m.net_->params()) {
            sections.push_back({tensor->name, tensor->v});
        }
        write_container(out, kind, m.space_, meta.str(), m.vocab_, sections);
        return;
    }

    throw ConfigError("unknown classifier kind: " + kind);
}

void ModelCodec::save(TextClassifier& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    save(model, out);
    if (!out) throw DataError("failed writing model file: " + path);
}

// ---------------------------------------------------------------------------
// load
// ---------------------------------------------------------------------------

std::unique_ptr<TextClassifier> ModelCodec::load(std::istream& in) {
    char magic[7];
    in.read(magic, 7);
    if (!in || std::memcmp(magic, kMagic, 7) != 0) throw DataError("not a model file");
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw DataError("unsupported model file version " + std::to_string(version));
    }

    const std::string kind = read_str(in);
    const std::string label_kind = read_str(in);
    const std::uint32_t positive = read_u32(in);
    MetaReader meta(read_str(in));
    const std::uint64_t vocab_hash = read_u64(in);
    Vocabulary vocab = vocab_from_text(read_str(in));
    if (vocab.hash() != vocab_hash) throw DataError("vocabulary hash mismatch in model file");
    const std::vector<Section> sections = read_sections(in);

    LabelSpace space = parse_label_space(label_kind, positive);

    if (kind == "logreg") {
        FeatureConfig features{meta.size("max_vocab"), meta.size("min_df")};
        LogRegConfig config{meta.real("lr"), meta.size("epochs"), meta.real("l2_lambda"),
                            meta.u64("seed")};
        auto model = std::make_unique<TfidfLogRegClassifier>(space, features, config);
        model->tfidf_.vocab_ = std::move(vocab);
        model->tfidf_.idf_ = find_section(sections, "idf").data;
        model->model_.weights_ = find_section(sections, "weights").data;
        model->model_.bias_ = find_section(sections, "bias").data.at(0);
        model->model_.l2_lambda_ = config.l2_lambda;
        model->model_.loss_trace_ = find_section(sections, "loss_trace").data;
        if (model->model_.weights_.size() != model->tfidf_.vocab_.size()) {
            throw DataError("weight/vocabulary size mismatch in model file");
        }
        return model;
    }

    if (kind == "nb") {
        FeatureConfig features{meta.size("max_vocab"), meta.size("min_df")};
        auto model = std::make_unique<NaiveBayesClassifier>(space, features, meta.real("alpha"));
        model->vocab_ = std::move(vocab);
        const auto& prior = find_section(sections, "log_prior").data;
        if (prior.size() != 2) throw DataError("malformed log_prior section");
        model->model_.log_prior_ = {prior[0], prior[1]};
        model->model_.log_likelihood_[0] = find_section(sections, "log_likelihood_0").data;
        model->model_.log_likelihood_[1] = find_section(sections, "log_likelihood_1").data;
        model->model_.alpha_ = meta.real("alpha");
        if (model->model_.log_likelihood_[0].size() != model->vocab_.size()) {
            throw DataError("likelihood/vocabulary size mismatch in model file");
        }
        return model;
    }

    if (kind == "forest") {
        FeatureConfig features{meta.size("max_vocab"), meta.size("min_df")};
        ForestConfig config;
        config.trees = meta.size("trees");
        config.feature_fraction = meta.real("feature_fraction");
        config.max_depth = meta.size("max_depth");
        config.min_split = meta.size("min_split");
        config.seed = meta.u64("seed");
        auto model = std::make_unique<TfidfForestClassifier>(space, features, config);
        model->tfidf_.vocab_ = std::move(vocab);
        model->tfidf_.idf_ = find_section(sections, "idf").data;
        model->model_.trees_.reserve(config.trees);
        for (std::size_t t = 0; t < config.trees; ++t) {
            model->model_.trees_.push_back(
                unflatten_tree(find_section(sections, "tree" + std::to_string(t)).data));
        }
        return model;
    }

    if (is_neural_kind(kind)) {
        NeuralClassifierConfig config;
        config.arch = meta.str("arch");
        config.max_vocab = meta.size("max_vocab");
        config.min_df = meta.size("min_df");
        config.max_len = meta.size("max_len");
        config.d_model = meta.size("d_model");
        config.heads = meta.size("heads");
        config.layers = meta.size("layers");
        config.d_ff = meta.size("d_ff");
        config.dropout = meta.real("dropout");
        config.rel_k = meta.size("rel_k");
        config.d_emb = meta.size("d_emb");
        config.hidden = meta.size("hidden");
        config.val_fraction = meta.real("val_fraction");
        config.seed = meta.u64("seed");
        config.train.epochs = meta.size("train.epochs");
        config.train.batch_size = meta.size("train.batch_size");
        config.train.patience = meta.size("train.patience");
        config.train.seed = meta.u64("train.seed");
        config.train.opt.lr = meta.real("opt.lr");
        config.train.opt.beta1 = meta.real("opt.beta1");
        config.train.opt.beta2 = meta.real("opt.beta2");
        config.train.opt.eps = meta.real("opt.eps");
        config.train.opt.weight_decay = meta.real("opt.weight_decay");
        if (config.arch != kind) throw DataError("model kind/arch mismatch in model file");

        auto model = std::make_unique<NeuralTextClassifier>(space, config);
        model->vocab_ = std::move(vocab);
        model->build_net();
        ParamList params = model->net_->params();
        if (params.size() != sections.size()) {
            throw DataError("parameter section count mismatch in model file");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (sections[i].name != params[i]->name) {
                throw DataError("unexpected parameter section: " + sections[i].name);
            }
            if (sections[i].data.size() != params[i]->v.size()) {
                throw DataError("parameter size mismatch in section: " + sections[i].name);
            }
            params[i]->v = sections[i].data;
        }
        return model;
    }

    throw DataError("unknown classifier kind in model file: " + kind);
}

std::unique_ptr<TextClassifier> ModelCodec::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read model file: " + path);
    return load(in);
}

// ---------------------------------------------------------------------------
// pipeline manifest
// ---------------------------------------------------------------------------

std::string save_pipeline(TwoStepPipeline& pipeline, const std::string& dir,
                          const std::string& run_id) {
    namespace fs = std::filesystem;
    if (!pipeline.filter.model || !pipeline.veracity) {
        throw DataError("cannot save an untrained pipeline");
    }
    fs::create_directories(dir);
    const std::string filter_name = run_id + "_filter.model";
    const std::string veracity_name = run_id + "_veracity.model";
    ModelCodec::save(*pipeline.filter.model, (fs::path(dir) / filter_name).string());
    ModelCodec::save(*pipeline.veracity, (fs::path(dir) / veracity_name).string());

    nlohmann::json manifest;
    manifest["format"] = "newsbench-pipeline";
    manifest["version"] = 1;
    manifest["filter_model"] = filter_name;
    manifest["veracity_model"] = veracity_name;
    manifest["tau"] = pipeline.filter.tau;
    manifest["stopwords"] = pipeline.stopwords.name();
    const PipelineProvenance& p = pipeline.provenance;
    manifest["provenance"] = {
        {"filter_kind", p.filter_kind},
        {"veracity_kind", p.veracity_kind},
        {"tau", p.tau},
        {"filter_holdout_accuracy", p.filter_holdout_accuracy},
        {"factop_documents", p.factop_documents},
        {"veracity_documents", p.veracity_documents},
        {"removed_by_filter", p.removed_by_filter},
    };

    const std::string manifest_path = (fs::path(dir) / (run_id + "_pipeline.json")).string();
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw DataError("cannot write pipeline manifest: " + manifest_path);
    out << manifest.dump(2) << '\n';
    return manifest_path;
}

TwoStepPipeline load_pipeline(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot read pipeline manifest: " + manifest_path);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed pipeline manifest: " + std::string(e.what()));
    }
    if (manifest.value("format", "") != "newsbench-pipeline") {
        throw DataError("not a pipeline manifest: " + manifest_path);
    }

    const fs::path base = fs::path(manifest_path).parent_path();
    TwoStepPipeline pipeline;
    pipeline.filter.model = ModelCodec::load((base / manifest.at("filter_model").get<std::string>()).string());
    pipeline.veracity = ModelCodec::load((base / manifest.at("veracity_model").get<std::string>()).string());
    pipeline.filter.tau = manifest.at("tau").get<double>();

    const std::string stopwords = manifest.value("stopwords", "english-179");
    pipeline.stopwords = stopwords == "none" ? StopwordList::empty() : StopwordList::english();

    const auto& p = manifest.at("provenance");
    pipeline.provenance.filter_kind = p.value("filter_kind", "");
    pipeline.provenance.veracity_kind = p.value("veracity_kind", "");
    pipeline.provenance.tau = p.value("tau", pipeline.filter.tau);
    pipeline.provenance.filter_holdout_accuracy = p.value("filter_holdout_accuracy", 0.0);
    pipeline.provenance.factop_documents = p.value("factop_documents", std::size_t{0});
    pipeline.provenance.veracity_documents = p.value("veracity_documents", std::size_t{0});
    pipeline.provenance.removed_by_filter = p.value("removed_by_filter", std::size_t{0});
    pipeline.filter.holdout_accuracy = pipeline.provenance.filter_holdout_accuracy;
    return pipeline;
}

}  // namespace newsbench
