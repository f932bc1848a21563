#include "newsbench/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "newsbench/errors.hpp"
#include "newsbench/rng.hpp"

#include "json.hpp"

namespace newsbench {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_to(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

DataSource parse_source(const json& obj, const std::string& where) {
    check_keys(obj, where,
               {"kind", "name", "path", "fake", "true", "n_per_class", "separation", "seed"});
    DataSource source;
    read_to(obj, "kind", source.kind);
    read_to(obj, "name", source.name);
    read_to(obj, "path", source.path);
    read_to(obj, "fake", source.fake_path);
    read_to(obj, "true", source.true_path);
    read_to(obj, "n_per_class", source.n_per_class);
    read_to(obj, "separation", source.separation);
    read_to(obj, "seed", source.seed);

    if (source.kind == "canonical") {
        if (source.path.empty()) throw ConfigError("config: " + where + " needs 'path'");
    } else if (source.kind == "isot") {
        if (source.fake_path.empty() || source.true_path.empty()) {
            throw ConfigError("config: " + where + " needs 'fake' and 'true' paths");
        }
    } else if (source.kind == "synthetic") {
        if (source.n_per_class == 0) {
            throw ConfigError("config: " + where + " needs n_per_class >= 1");
        }
        if (source.separation < 0.0 || source.separation > 1.0) {
            throw ConfigError("config: separation must be in [0, 1]");
        }
    } else {
        throw ConfigError("config: unknown dataset kind '" + source.kind + "' in " + where);
    }

    if (source.name.empty()) {
        if (source.kind == "canonical") {
            source.name = std::filesystem::path(source.path).stem().string();
        } else {
            source.name = source.kind;
        }
    }
    return source;
}

SplitSpec parse_split(const json& obj, const std::string& where, std::uint64_t default_seed) {
    check_keys(obj, where,
               {"train_fraction", "val_fraction", "test_fraction", "seed", "stratified"});
    SplitSpec spec;
    read_to(obj, "train_fraction", spec.train_fraction);
    read_to(obj, "val_fraction", spec.val_fraction);
    read_to(obj, "test_fraction", spec.test_fraction);
    spec.seed = default_seed;
    read_to(obj, "seed", spec.seed);
    read_to(obj, "stratified", spec.stratified);
    spec.validate();
    return spec;
}

ClassifierSpec parse_model(const json& obj, const std::string& where, std::uint64_t default_seed,
                           int threads) {
    check_keys(obj, where,
               {"kind", "seed", "features", "logreg", "nb", "forest", "neural", "train"});
    ClassifierSpec spec;
    read_to(obj, "kind", spec.kind);
    spec.seed = default_seed;
    read_to(obj, "seed", spec.seed);
    spec.threads = threads;

    static const char* kinds[] = {"logreg", "nb", "forest", "lstm", "transformer", "deberta"};
    bool known = false;
    for (const char* kind : kinds) known = known || spec.kind == kind;
    if (!known) throw ConfigError("config: unknown classifier kind '" + spec.kind + "'");

    if (obj.contains("features")) {
        const json& f = obj.at("features");
        check_keys(f, where + ".features", {"max_vocab", "min_df", "max_len"});
        read_to(f, "max_vocab", spec.features.max_vocab);
        read_to(f, "min_df", spec.features.min_df);
        read_to(f, "max_len", spec.neural.max_len);
    }
    if (obj.contains("logreg")) {
        const json& m = obj.at("logreg");
        check_keys(m, where + ".logreg", {"lr", "epochs", "l2_lambda"});
        read_to(m, "lr", spec.logreg.lr);
        read_to(m, "epochs", spec.logreg.epochs);
        read_to(m, "l2_lambda", spec.logreg.l2_lambda);
    }
    if (obj.contains("nb")) {
        const json& m = obj.at("nb");
        check_keys(m, where + ".nb", {"alpha"});
        read_to(m, "alpha", spec.nb_alpha);
    }
    if (obj.contains("forest")) {
        const json& m = obj.at("forest");
        check_keys(m, where + ".forest", {"trees", "feature_fraction", "max_depth", "min_split"});
        read_to(m, "trees", spec.forest.trees);
        read_to(m, "feature_fraction", spec.forest.feature_fraction);
        read_to(m, "max_depth", spec.forest.max_depth);
        read_to(m, "min_split", spec.forest.min_split);
    }
    if (obj.contains("neural")) {
        const json& m = obj.at("neural");
        check_keys(m, where + ".neural",
                   {"d_model", "heads", "layers", "d_ff", "dropout", "rel_k", "d_emb", "hidden",
                    "val_fraction"});
        read_to(m, "d_model", spec.neural.d_model);
        read_to(m, "heads", spec.neural.heads);
        read_to(m, "layers", spec.neural.layers);
        read_to(m, "d_ff", spec.neural.d_ff);
        read_to(m, "dropout", spec.neural.dropout);
        read_to(m, "rel_k", spec.neural.rel_k);
        read_to(m, "d_emb", spec.neural.d_emb);
        read_to(m, "hidden", spec.neural.hidden);
        read_to(m, "val_fraction", spec.neural.val_fraction);
    }
    if (obj.contains("train")) {
        const json& m = obj.at("train");
        check_keys(m, where + ".train",
                   {"epochs", "batch_size", "patience", "lr", "beta1", "beta2", "eps",
                    "weight_decay", "seed"});
        read_to(m, "epochs", spec.neural.train.epochs);
        read_to(m, "batch_size", spec.neural.train.batch_size);
        read_to(m, "patience", spec.neural.train.patience);
        read_to(m, "lr", spec.neural.train.opt.lr);
        read_to(m, "beta1", spec.neural.train.opt.beta1);
        read_to(m, "beta2", spec.neural.train.opt.beta2);
        read_to(m, "eps", spec.neural.train.opt.eps);
        read_to(m, "weight_decay", spec.neural.train.opt.weight_decay);
        read_to(m, "seed", spec.neural.train.seed);
    }

    spec.neural.max_vocab = spec.features.max_vocab;
    spec.neural.min_df = spec.features.min_df;
    return spec;
}

json source_json(const DataSource& source) {
    json obj;
    obj["kind"] = source.kind;
    obj["name"] = source.name;
    if (source.kind == "canonical") obj["path"] = source.path;
    if (source.kind == "isot") {
        obj["fake"] = source.fake_path;
        obj["true"] = source.true_path;
    }
    if (source.kind == "synthetic") {
        obj["n_per_class"] = source.n_per_class;
        obj["separation"] = source.separation;
        obj["seed"] = source.seed;
    }
    return obj;
}

json split_json(const SplitSpec& spec) {
    json obj;
    obj["train_fraction"] = spec.train_fraction;
    obj["val_fraction"] = spec.val_fraction;
    obj["test_fraction"] = spec.test_fraction;
    obj["seed"] = spec.seed;
    obj["stratified"] = spec.stratified;
    return obj;
}

json model_json(const ClassifierSpec& spec) {
    json obj;
    obj["kind"] = spec.kind;
    obj["seed"] = spec.seed;
    obj["features"] = {{"max_vocab", spec.features.max_vocab},
                       {"min_df", spec.features.min_df},
                       {"max_len", spec.neural.max_len}};
    obj["logreg"] = {{"lr", spec.logreg.lr},
                     {"epochs", spec.logreg.epochs},
                     {"l2_lambda", spec.logreg.l2_lambda}};
    obj["nb"] = {{"alpha", spec.nb_alpha}};
    obj["forest"] = {{"trees", spec.forest.trees},
                     {"feature_fraction", spec.forest.feature_fraction},
                     {"max_depth", spec.forest.max_depth},
                     {"min_split", spec.forest.min_split}};
    obj["neural"] = {{"d_model", spec.neural.d_model},
                     {"heads", spec.neural.heads},
                     {"layers", spec.neural.layers},
                     {"d_ff", spec.neural.d_ff},
                     {"dropout", spec.neural.dropout},
                     {"rel_k", spec.neural.rel_k},
                     {"d_emb", spec.neural.d_emb},
                     {"hidden", spec.neural.hidden},
                     {"val_fraction", spec.neural.val_fraction}};
    obj["train"] = {{"epochs", spec.neural.train.epochs},
                    {"batch_size", spec.neural.train.batch_size},
                    {"patience", spec.neural.train.patience},
                    {"lr", spec.neural.train.opt.lr},
                    {"beta1", spec.neural.train.opt.beta1},
                    {"beta2", spec.neural.train.opt.beta2},
                    {"eps", spec.neural.train.opt.eps},
                    {"weight_decay", spec.neural.train.opt.weight_decay},
                    {"seed", spec.neural.train.seed}};
    return obj;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON: " + std::string(e.what()));
    }
    check_keys(root, "config",
               {"run_id", "out_dir", "seed", "threads", "label_space", "use_stopwords", "dataset",
                "factop", "split", "model", "pipeline"});

    RunConfig config;
    read_to(root, "run_id", config.run_id);
    read_to(root, "out_dir", config.out_dir);
    read_to(root, "seed", config.seed);
    read_to(root, "threads", config.threads);
    read_to(root, "label_space", config.label_space);
    read_to(root, "use_stopwords", config.use_stopwords);

    if (config.run_id.empty()) throw ConfigError("config: run_id must be non-empty");
    if (config.threads < 1) throw ConfigError("config: threads must be >= 1");
    if (config.label_space != "veracity" && config.label_space != "subjectivity") {
        throw ConfigError("config: label_space must be veracity or subjectivity");
    }

    if (root.contains("dataset")) {
        config.dataset = parse_source(root.at("dataset"), "dataset");
        if (!root.at("dataset").contains("seed")) {
            config.dataset.seed = derive_seed(config.seed, "data");
        }
        config.has_dataset = true;
    }
    if (root.contains("factop")) {
        config.factop = parse_source(root.at("factop"), "factop");
        if (!root.at("factop").contains("seed")) {
            config.factop.seed = derive_seed(config.seed, "factop");
        }
        config.has_factop = true;
    }

    config.split = root.contains("split")
                       ? parse_split(root.at("split"), "split", derive_seed(config.seed, "split"))
                       : SplitSpec{0.8, 0.1, 0.1, derive_seed(config.seed, "split"), true};

    config.model = root.contains("model")
                       ? parse_model(root.at("model"), "model", derive_seed(config.seed, "model"),
                                     config.threads)
                       : [&] {
                             ClassifierSpec spec;
                             spec.seed = derive_seed(config.seed, "model");
                             spec.threads = config.threads;
                             return spec;
                         }();

    config.pipeline.filter.seed = derive_seed(config.seed, "filter");
    config.pipeline.filter.threads = config.threads;
    config.pipeline.filter_split =
        SplitSpec{0.8, 0.1, 0.1, derive_seed(config.seed, "filter-split"), true};
    if (root.contains("pipeline")) {
        const json& p = root.at("pipeline");
        check_keys(p, "pipeline", {"tau", "exclude_opinion", "filter", "filter_split"});
        read_to(p, "tau", config.pipeline.tau);
        read_to(p, "exclude_opinion", config.pipeline.exclude_opinion);
        if (p.contains("filter")) {
            config.pipeline.filter = parse_model(p.at("filter"), "pipeline.filter",
                                                 derive_seed(config.seed, "filter"),
                                                 config.threads);
        }
        if (p.contains("filter_split")) {
            config.pipeline.filter_split = parse_split(p.at("filter_split"),
                                                       "pipeline.filter_split",
                                                       derive_seed(config.seed, "filter-split"));
        }
        if (config.pipeline.tau <= 0.0 || config.pipeline.tau >= 1.0) {
            throw ConfigError("config: tau must be in (0, 1)");
        }
    }

    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string run_config_text(const RunConfig& config) {
    json root;
    root["run_id"] = config.run_id;
    root["out_dir"] = config.out_dir;
    root["seed"] = config.seed;
    root["threads"] = config.threads;
    root["label_space"] = config.label_space;
    root["use_stopwords"] = config.use_stopwords;
    if (config.has_dataset) root["dataset"] = source_json(config.dataset);
    if (config.has_factop) root["factop"] = source_json(config.factop);
    root["split"] = split_json(config.split);
    root["model"] = model_json(config.model);
    root["pipeline"] = {{"tau", config.pipeline.tau},
                        {"exclude_opinion", config.pipeline.exclude_opinion},
                        {"filter", model_json(config.pipeline.filter)},
                        {"filter_split", split_json(config.pipeline.filter_split)}};
    return root.dump(2) + "\n";
}

void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write config file: " + path);
    out << run_config_text(config);
}

LabelSpace label_space_of(const RunConfig& config) {
    return config.label_space == "subjectivity" ? LabelSpace::subjectivity()
                                                : LabelSpace::veracity();
}

LabeledCorpus load_source(const DataSource& source, const LabelSpace& space) {
    if (source.kind == "canonical") return load_canonical(source.path, space);
    if (source.kind == "isot") {
        if (space.kind() != LabelKind::Veracity) {
            throw ConfigError("config: isot datasets use the veracity label space");
        }
        return load_isot(source.fake_path, source.true_path);
    }
    if (source.kind == "synthetic") {
        return generate_synthetic(source.n_per_class, space, source.seed, source.separation);
    }
    throw ConfigError("config: unknown dataset kind '" + source.kind + "'");
}

}  // namespace newsbench
