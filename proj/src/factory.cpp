#include "newsbench/factory.hpp"

#include "newsbench/errors.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

bool is_neural_kind(const std::string& kind) {
    return kind == "lstm" || kind == "transformer" || kind == "deberta";
}

std::unique_ptr<TextClassifier> make_classifier(const ClassifierSpec& spec, LabelSpace space) {
    if (spec.kind == "logreg") {
        LogRegConfig config = spec.logreg;
        config.seed = derive_seed(spec.seed, "logreg");
        return std::make_unique<TfidfLogRegClassifier>(std::move(space), spec.features, config);
    }
    if (spec.kind == "nb") {
        return std::make_unique<NaiveBayesClassifier>(std::move(space), spec.features,
                                                      spec.nb_alpha);
    }
    if (spec.kind == "forest") {
        ForestConfig config = spec.forest;
        config.seed = derive_seed(spec.seed, "forest");
        config.threads = spec.threads;
        return std::make_unique<TfidfForestClassifier>(std::move(space), spec.features, config);
    }
    if (is_neural_kind(spec.kind)) {
        NeuralClassifierConfig config = spec.neural;
        config.arch = spec.kind;
        config.seed = derive_seed(spec.seed, "neural");
        return std::make_unique<NeuralTextClassifier>(std::move(space), std::move(config));
    }
    throw ConfigError("unknown classifier kind '" + spec.kind + "'");
}

}  // namespace newsbench
