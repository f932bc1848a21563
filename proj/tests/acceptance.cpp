// Acceptance gate: prints one pass/fail line per criterion and exits with the
// number of failures. Criteria that need the public news datasets skip with an
// explanation when the corpora are not present.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "newsbench/baselines.hpp"
#include "newsbench/corpus.hpp"
#include "newsbench/errors.hpp"
#include "newsbench/eval.hpp"
#include "newsbench/factory.hpp"
#include "newsbench/neural/attention.hpp"
#include "newsbench/neural/layers.hpp"
#include "newsbench/neural/loss.hpp"
#include "newsbench/neural/lstm.hpp"
#include "newsbench/neural/neural_classifier.hpp"
#include "newsbench/neural/pretrain.hpp"
#include "newsbench/neural/tensor.hpp"
#include "newsbench/neural/train.hpp"
#include "newsbench/neural/transformer.hpp"
#include "newsbench/pipeline.hpp"
#include "newsbench/preprocess.hpp"
#include "newsbench/report.hpp"
#include "newsbench/rng.hpp"

namespace {

using namespace newsbench;
namespace fs = std::filesystem;

// Pinned tolerances and floors.
constexpr double kMetricTol = 1e-12;        // metric ratios against the oracle
constexpr double kFixtureF1Tol = 1e-4;      // macro-F1 of the fixed confusion fixture
constexpr double kFdStep = 1e-5;            // finite-difference step
constexpr double kFdTol = 1e-4;             // max relative gradient error
constexpr double kRowSumTol = 1e-6;         // attention row sums
constexpr double kPadTol = 1e-6;            // padding-extension logit drift
constexpr double kDistillTol = 1e-12;       // alpha = 1 equivalence
constexpr double kDeltaTol = 1e-12;         // published comparison deltas
constexpr double kMlmLossRatio = 0.8;       // final/initial pretraining loss
constexpr double kAgreementFloor = 0.9;     // student/teacher agreement
constexpr double kBaselineBudget = 600.0;   // seconds per full-corpus baseline
constexpr double kSyntheticBudget = 300.0;  // seconds per synthetic model

struct Outcome {
    std::string status;  // PASS, FAIL or SKIP
    std::string detail;
};

Outcome pass(std::string detail) { return {"PASS", std::move(detail)}; }
Outcome fail(std::string detail) { return {"FAIL", std::move(detail)}; }
Outcome skip(std::string detail) { return {"SKIP", std::move(detail)}; }

std::string fmt(const char* pattern, ...) {
    char buf[768];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "newsbench_acceptance" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string quoted(const fs::path& path) { return "\"" + path.string() + "\""; }

int run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path out = scratch / "stdout.txt";
    const fs::path err = scratch / "stderr.txt";
    const std::string command = std::string("\"") + NEWSBENCH_CLI_PATH + "\" " + args + " > " +
                                quoted(out) + " 2> " + quoted(err);
    const int status = std::system(command.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

void corpus_tokens(const LabeledCorpus& corpus, const StopwordList& stop,
                   std::vector<TokenList>& docs, std::vector<int>& labels) {
    docs.clear();
    labels.clear();
    for (const Document& doc : corpus.documents()) {
        docs.push_back(preprocess(doc, stop).tokens);
        labels.push_back(*doc.label);
    }
}

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    Mat m(rows, cols);
    for (double& v : m.a) v = rng.next_gaussian() * scale;
    return m;
}

double weighted_sum(const Mat& y, const Mat& coeff) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.a.size(); ++i) s += y.a[i] * coeff.a[i];
    return s;
}

// Central finite differences over every parameter coordinate; the analytic
// gradients must already be accumulated.
template <typename Fn>
double worst_param_err(const ParamList& params, Fn&& loss) {
    double worst = 0.0;
    for (Tensor* t : params) {
        for (std::size_t i = 0; i < t->v.size(); ++i) {
            const double keep = t->v[i];
            t->v[i] = keep + kFdStep;
            const double up = loss();
            t->v[i] = keep - kFdStep;
            const double down = loss();
            t->v[i] = keep;
            worst = std::max(worst, rel_err(t->g[i], (up - down) / (2.0 * kFdStep)));
        }
    }
    return worst;
}

template <typename Fn>
double worst_input_err(Mat& x, const Mat& dx, Fn&& loss) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) {
        const double keep = x.a[i];
        x.a[i] = keep + kFdStep;
        const double up = loss();
        x.a[i] = keep - kFdStep;
        const double down = loss();
        x.a[i] = keep;
        worst = std::max(worst, rel_err(dx.a[i], (up - down) / (2.0 * kFdStep)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// 1. Baselines on the full ISOT corpus.
// ---------------------------------------------------------------------------

Outcome isot_baselines() {
    const char* fake_path = std::getenv("NEWSBENCH_ISOT_FAKE");
    const char* true_path = std::getenv("NEWSBENCH_ISOT_TRUE");
    if (fake_path == nullptr || true_path == nullptr) {
        return skip(
            "ISOT corpus not bundled; set NEWSBENCH_ISOT_FAKE and NEWSBENCH_ISOT_TRUE to the "
            "Fake.csv/True.csv paths to run the full baseline check");
    }

    const LabeledCorpus corpus = load_isot(fake_path, true_path);
    const SplitResult parts = split(corpus, SplitSpec{});
    const StopwordList& stop = StopwordList::english();
    std::vector<TokenList> train_docs;
    std::vector<int> train_labels;
    corpus_tokens(parts.train, stop, train_docs, train_labels);

    const FeatureConfig features{50000, 2};
    ForestConfig forest_config;
    forest_config.threads = 8;

    struct Entry {
        const char* name;
        std::unique_ptr<TextClassifier> model;
        double floor;
    };
    std::vector<Entry> entries;
    entries.push_back(
        {"logreg", std::make_unique<TfidfLogRegClassifier>(corpus.label_space(), features), 0.95});
    entries.push_back(
        {"nb", std::make_unique<NaiveBayesClassifier>(corpus.label_space(), features), 0.90});
    entries.push_back({"forest",
                       std::make_unique<TfidfForestClassifier>(corpus.label_space(), features,
                                                               forest_config),
                       0.90});

    std::string detail;
    for (Entry& entry : entries) {
        const auto start = std::chrono::steady_clock::now();
        entry.model->fit(train_docs, train_labels);
        const EvaluationReport report = evaluate(*entry.model, parts.test, stop, 8);
        const double secs = seconds_since(start);
        const double acc = report.metric_set.macro.accuracy;
        detail += fmt("%s acc=%.4f (%.0fs); ", entry.name, acc, secs);
        if (acc < entry.floor) {
            return fail(detail + fmt("%s below its %.2f accuracy floor", entry.name, entry.floor));
        }
        if (secs > kBaselineBudget) {
            return fail(detail + fmt("%s exceeded the %.0fs budget", entry.name, kBaselineBudget));
        }
    }
    return pass(detail + "all holdout floors met");
}

// ---------------------------------------------------------------------------
// 2. Cross-dataset generalisation gap.
// ---------------------------------------------------------------------------

Outcome cross_dataset_generalisation() {
    const char* fake_path = std::getenv("NEWSBENCH_ISOT_FAKE");
    const char* true_path = std::getenv("NEWSBENCH_ISOT_TRUE");
    const char* cc_path = std::getenv("NEWSBENCH_CC");
    if (fake_path == nullptr || true_path == nullptr || cc_path == nullptr) {
        return skip(
            "cross-dataset corpora not bundled; set NEWSBENCH_ISOT_FAKE, NEWSBENCH_ISOT_TRUE and "
            "NEWSBENCH_CC (canonical CSV) to run the generalisation check");
    }

    const LabeledCorpus isot = load_isot(fake_path, true_path);
    const LabeledCorpus cc = load_canonical(cc_path, LabelSpace::veracity());
    const SplitResult isot_parts = split(isot, SplitSpec{});
    const SplitResult cc_parts = split(cc, SplitSpec{});
    const StopwordList& stop = StopwordList::english();
    const FeatureConfig features{50000, 2};

    std::vector<TokenList> docs;
    std::vector<int> labels;

    corpus_tokens(isot_parts.train, stop, docs, labels);
    TfidfLogRegClassifier isot_model(isot.label_space(), features);
    isot_model.fit(docs, labels);
    const double holdout = evaluate(isot_model, isot_parts.test, stop, 8).metric_set.macro.accuracy;
    const double forward = cross_evaluate(isot_model, cc, stop, 8).metric_set.macro.accuracy;

    corpus_tokens(cc_parts.train, stop, docs, labels);
    TfidfLogRegClassifier cc_model(cc.label_space(), features);
    cc_model.fit(docs, labels);
    const double reverse = cross_evaluate(cc_model, isot, stop, 8).metric_set.macro.accuracy;

    const std::string detail =
        fmt("ISOT holdout=%.4f, ISOT->CC=%.4f, CC->ISOT=%.4f", holdout, forward, reverse);
    if (forward < 0.55 || forward > 0.75) return fail(detail + "; ISOT->CC outside [0.55, 0.75]");
    if (holdout - forward < 0.15) {
        return fail(detail + "; ISOT->CC less than 15 points below the ISOT holdout");
    }
    if (reverse < 0.60 || reverse > 0.85) return fail(detail + "; CC->ISOT outside [0.60, 0.85]");
    return pass(detail);
}

// ---------------------------------------------------------------------------
// 3. Metric oracle.
// ---------------------------------------------------------------------------

Outcome metric_oracle() {
    Rng rng(derive_seed(2024, "acceptance-metrics"));
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.next_below(64);
        std::vector<int> labels(n), preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.next_below(2));
            preds[i] = static_cast<int>(rng.next_below(2));
        }
        const int positive = trial % 2;

        const ConfusionMatrix cm = confusion(preds, labels, positive);
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool actual = labels[i] == positive;
            const bool predicted = preds[i] == positive;
            tp += actual && predicted;
            fp += !actual && predicted;
            fn += actual && !predicted;
            tn += !actual && !predicted;
        }
        if (cm.tp != tp || cm.fp != fp || cm.fn != fn || cm.tn != tn) {
            return fail(fmt("confusion counts diverge from direct counting on trial %d", trial));
        }

        const auto from_counts = [](std::size_t tp_, std::size_t fp_, std::size_t fn_,
                                    std::size_t tn_) {
            ClassMetrics c;
            const double total = static_cast<double>(tp_ + fp_ + fn_ + tn_);
            c.accuracy = (static_cast<double>(tp_) + static_cast<double>(tn_)) / total;
            c.precision = tp_ + fp_ ? static_cast<double>(tp_) / static_cast<double>(tp_ + fp_) : 0.0;
            c.recall = tp_ + fn_ ? static_cast<double>(tp_) / static_cast<double>(tp_ + fn_) : 0.0;
            c.f1 = c.precision + c.recall > 0.0
                       ? 2.0 * c.precision * c.recall / (c.precision + c.recall)
                       : 0.0;
            return c;
        };
        const ClassMetrics want_pos = from_counts(tp, fp, fn, tn);
        const ClassMetrics want_neg = from_counts(tn, fn, fp, tp);
        const MetricSet got = metrics(cm);

        const auto probe = [&](double got_value, double want_value) {
            worst = std::max(worst, std::fabs(got_value - want_value));
        };
        probe(got.positive.accuracy, want_pos.accuracy);
        probe(got.positive.precision, want_pos.precision);
        probe(got.positive.recall, want_pos.recall);
        probe(got.positive.f1, want_pos.f1);
        probe(got.negative.accuracy, want_neg.accuracy);
        probe(got.negative.precision, want_neg.precision);
        probe(got.negative.recall, want_neg.recall);
        probe(got.negative.f1, want_neg.f1);
        probe(got.macro.accuracy, (want_pos.accuracy + want_neg.accuracy) / 2.0);
        probe(got.macro.precision, (want_pos.precision + want_neg.precision) / 2.0);
        probe(got.macro.recall, (want_pos.recall + want_neg.recall) / 2.0);
        probe(got.macro.f1, (want_pos.f1 + want_neg.f1) / 2.0);
    }
    if (worst > kMetricTol) {
        return fail(fmt("metric deviation %.3g exceeds %.0e over 1000 random vectors", worst,
                        kMetricTol));
    }

    const ConfusionMatrix fixture{3, 1, 2, 4};
    const double macro_f1 = metrics(fixture).macro.f1;
    if (std::fabs(macro_f1 - 0.6970) > kFixtureF1Tol) {
        return fail(fmt("fixture tp=3 fp=1 fn=2 tn=4 macro-F1 %.6f not within %.0e of 0.6970",
                        macro_f1, kFixtureF1Tol));
    }
    return pass(fmt("1000 random vectors within %.0e; fixture macro-F1 %.6f", kMetricTol, macro_f1));
}

// ---------------------------------------------------------------------------
// 4. Finite-difference gradient checks for every block.
// ---------------------------------------------------------------------------

Outcome gradient_checks() {
    Rng rng(derive_seed(7, "acceptance-gradients"));
    double worst = 0.0;
    std::size_t checks = 0;
    const auto track = [&](double err) {
        worst = std::max(worst, err);
        ++checks;
    };

    for (int shape = 0; shape < 5; ++shape) {
        const std::size_t T = 2 + rng.next_below(4);

        {
            const std::size_t in = 2 + rng.next_below(5);
            const std::size_t out = 2 + rng.next_below(5);
            Linear lin("lin", in, out, rng);
            Mat x = random_mat(rng, T, in, 0.8);
            const Mat coeff = random_mat(rng, T, out, 1.0);
            ParamList params;
            lin.params(params);
            zero_grads(params);
            Linear::Cache cache;
            lin.forward(x, &cache);
            const Mat dx = lin.backward(coeff, cache);
            const auto loss = [&] { return weighted_sum(lin.forward(x, nullptr), coeff); };
            track(worst_param_err(params, loss));
            track(worst_input_err(x, dx, loss));
        }
        {
            const std::size_t dim = 3 + rng.next_below(5);
            LayerNorm ln("ln", dim);
            for (double& v : ln.gamma.v) v = 0.5 + rng.next_double();
            for (double& v : ln.beta.v) v = rng.next_gaussian() * 0.3;
            Mat x = random_mat(rng, T, dim, 1.0);
            const Mat coeff = random_mat(rng, T, dim, 1.0);
            ParamList params;
            ln.params(params);
            zero_grads(params);
            LayerNorm::Cache cache;
            ln.forward(x, &cache);
            const Mat dx = ln.backward(coeff, cache);
            const auto loss = [&] { return weighted_sum(ln.forward(x, nullptr), coeff); };
            track(worst_param_err(params, loss));
            track(worst_input_err(x, dx, loss));
        }
        {
            const std::size_t d = 2 + rng.next_below(4);
            const std::size_t hidden = 3 + rng.next_below(5);
            Ffn ffn("ffn", d, hidden, rng);
            Mat x = random_mat(rng, T, d, 0.8);
            const Mat coeff = random_mat(rng, T, d, 1.0);
            ParamList params;
            ffn.params(params);
            zero_grads(params);
            Ffn::Cache cache;
            ffn.forward(x, &cache);
            const Mat dx = ffn.backward(coeff, cache);
            const auto loss = [&] { return weighted_sum(ffn.forward(x, nullptr), coeff); };
            track(worst_param_err(params, loss));
            track(worst_input_err(x, dx, loss));
        }
        {
            const std::size_t vocab = 5 + rng.next_below(5);
            const std::size_t dim = 2 + rng.next_below(4);
            Embedding emb("emb", vocab, dim, rng);
            std::vector<int> ids(T);
            for (int& id : ids) id = static_cast<int>(rng.next_below(vocab));
            const Mat coeff = random_mat(rng, T, dim, 1.0);
            ParamList params;
            emb.params(params);
            zero_grads(params);
            Embedding::Cache cache;
            emb.forward(ids, &cache);
            emb.backward(coeff, cache);
            const auto loss = [&] { return weighted_sum(emb.forward(ids, nullptr), coeff); };
            track(worst_param_err(params, loss));
        }
        for (int variant = 0; variant < 2; ++variant) {
            const std::size_t heads = 1 + rng.next_below(2);
            const std::size_t d_head = 2 + rng.next_below(3);
            AttentionConfig cfg;
            cfg.d_model = heads * d_head;
            cfg.heads = heads;
            cfg.disentangled = variant == 1;
            cfg.rel_k = 1 + rng.next_below(4);
            MultiHeadAttention attn("attn", cfg, rng);
            const std::size_t seq = 2 + rng.next_below(4);
            std::vector<unsigned char> valid(seq, 1);
            for (std::size_t j = 1 + rng.next_below(seq); j < seq; ++j) valid[j] = 0;
            Mat x = random_mat(rng, seq, cfg.d_model, 0.8);
            const Mat coeff = random_mat(rng, seq, cfg.d_model, 1.0);
            ParamList params;
            attn.params(params);
            zero_grads(params);
            MultiHeadAttention::Cache cache;
            attn.forward(x, valid, &cache);
            const Mat dx = attn.backward(coeff, cache);
            const auto loss = [&] { return weighted_sum(attn.forward(x, valid, nullptr), coeff); };
            track(worst_param_err(params, loss));
            track(worst_input_err(x, dx, loss));
        }
    }

    const auto net_err = [&](NeuralNet& net, const std::vector<int>& ids) {
        const std::array<double, 2> coeff = {0.7, -1.3};
        const ParamList params = net.params();
        zero_grads(params);
        net.forward_logits(ids, nullptr);
        net.backward_logits(coeff);
        const auto loss = [&] {
            const std::array<double, 2> logits = net.infer_logits(ids);
            return coeff[0] * logits[0] + coeff[1] * logits[1];
        };
        return worst_param_err(params, loss);
    };
    {
        LstmConfig cfg;
        cfg.vocab = 9;
        cfg.d_emb = 4;
        cfg.hidden = 3;
        cfg.seed = 31;
        LstmModel lstm(cfg);
        track(net_err(lstm, {2, 5, 3, 0, 0}));
    }
    for (int variant = 0; variant < 2; ++variant) {
        TransformerConfig cfg;
        cfg.vocab = model_vocab_rows(6);
        cfg.d_model = 8;
        cfg.heads = 2;
        cfg.layers = 1;
        cfg.d_ff = 12;
        cfg.max_len = 8;
        cfg.dropout = 0.0;
        cfg.disentangled = variant == 1;
        cfg.rel_k = 3;
        cfg.seed = 33 + variant;
        TransformerModel model(cfg);
        track(net_err(model, {2, 4, 3, 0}));
    }

    if (worst >= kFdTol) {
        return fail(fmt("max relative gradient error %.3g over %zu block checks (limit %.0e)",
                        worst, checks, kFdTol));
    }
    return pass(fmt("max relative gradient error %.3g over %zu block checks, step %.0e", worst,
                    checks, kFdStep));
}

// ---------------------------------------------------------------------------
// 5. Attention invariants.
// ---------------------------------------------------------------------------

Outcome attention_invariants() {
    // Row sums and pad columns across both variants, at the model level.
    for (int variant = 0; variant < 2; ++variant) {
        TransformerConfig cfg;
        cfg.vocab = model_vocab_rows(6);
        cfg.d_model = 8;
        cfg.heads = 2;
        cfg.layers = 2;
        cfg.d_ff = 12;
        cfg.max_len = 8;
        cfg.dropout = 0.0;
        cfg.disentangled = variant == 1;
        cfg.rel_k = 3;
        cfg.seed = 41 + variant;
        const TransformerModel model(cfg);
        const std::vector<int> ids = {3, 4, 0, 5, 0};
        const auto stacks = model.attention_probs(ids);
        if (stacks.size() != cfg.layers) return fail("attention_probs layer count mismatch");
        for (const auto& layer : stacks) {
            for (const Mat& p : layer) {
                if (p.rows != ids.size() || p.cols != ids.size()) {
                    return fail("attention probability matrix shape mismatch");
                }
                for (std::size_t i = 0; i < p.rows; ++i) {
                    double sum = 0.0;
                    for (std::size_t j = 0; j < p.cols; ++j) {
                        if (ids[j] == 0 && p.at(i, j) != 0.0) {
                            return fail(fmt("%s: padded key column carries probability %.3g",
                                            model.arch().c_str(), p.at(i, j)));
                        }
                        sum += p.at(i, j);
                    }
                    if (std::fabs(sum - 1.0) > kRowSumTol) {
                        return fail(fmt("%s: attention row sums to %.9f", model.arch().c_str(),
                                        sum));
                    }
                }
            }
        }

        // Padding extension must not move the logits.
        const std::array<double, 2> base = model.infer_logits({2, 3, 4});
        const std::array<double, 2> padded = model.infer_logits({2, 3, 4, 0, 0});
        const double drift =
            std::max(std::fabs(base[0] - padded[0]), std::fabs(base[1] - padded[1]));
        if (drift > kPadTol) {
            return fail(fmt("%s: padding extension moved logits by %.3g", model.arch().c_str(),
                            drift));
        }
    }
    {
        LstmConfig cfg;
        cfg.vocab = 9;
        cfg.d_emb = 4;
        cfg.hidden = 3;
        cfg.seed = 43;
        const LstmModel lstm(cfg);
        const std::array<double, 2> base = lstm.infer_logits({2, 5, 3});
        const std::array<double, 2> padded = lstm.infer_logits({2, 5, 3, 0, 0});
        const double drift =
            std::max(std::fabs(base[0] - padded[0]), std::fabs(base[1] - padded[1]));
        if (drift > kPadTol) return fail(fmt("lstm: padding extension moved logits by %.3g", drift));
    }

    // With the relative-position table zeroed, disentangled scores must equal
    // the content-content term exactly; the mirror below repeats that term
    // with the same arithmetic and demands bitwise-identical probabilities.
    {
        AttentionConfig cfg;
        cfg.d_model = 8;
        cfg.heads = 2;
        cfg.disentangled = true;
        cfg.rel_k = 3;
        Rng rng(derive_seed(5, "acceptance-attention"));
        MultiHeadAttention attn("attn", cfg, rng);
        attn.rel_emb.fill(0.0);

        const std::size_t T = 5;
        const Mat x = random_mat(rng, T, cfg.d_model, 0.9);
        const std::vector<unsigned char> valid = {1, 1, 1, 1, 0};
        std::vector<Mat> got;
        attn.forward(x, valid, nullptr, &got);

        const Mat q = attn.wq.forward(x, nullptr);
        const Mat k = attn.wk.forward(x, nullptr);
        const std::size_t dh = attn.d_head();
        const double scale = 1.0 / std::sqrt(3.0 * static_cast<double>(dh));
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            const std::size_t off = h * dh;
            Mat scores(T, T);
            for (std::size_t i = 0; i < T; ++i) {
                const double* qrow = q.row(i) + off;
                for (std::size_t j = 0; j < T; ++j) {
                    if (!valid[j]) continue;
                    const double* krow = k.row(j) + off;
                    double s = 0.0;
                    for (std::size_t c = 0; c < dh; ++c) s += qrow[c] * krow[c];
                    scores.at(i, j) = s * scale;
                }
            }
            for (std::size_t i = 0; i < T; ++i) {
                double mx = -1e300;
                for (std::size_t j = 0; j < T; ++j) {
                    if (valid[j] && scores.at(i, j) > mx) mx = scores.at(i, j);
                }
                double denom = 0.0;
                std::vector<double> row(T, 0.0);
                for (std::size_t j = 0; j < T; ++j) {
                    if (!valid[j]) continue;
                    row[j] = std::exp(scores.at(i, j) - mx);
                    denom += row[j];
                }
                for (std::size_t j = 0; j < T; ++j) {
                    const double want = valid[j] ? row[j] / denom : 0.0;
                    if (got[h].at(i, j) != want) {
                        return fail(fmt(
                            "zeroed relative table: head %zu probability (%zu,%zu) differs from "
                            "the content-content value by %.3g",
                            h, i, j, std::fabs(got[h].at(i, j) - want)));
                    }
                }
            }
        }
    }

    return pass(fmt("row sums within %.0e, padding drift within %.0e, zeroed relative table "
                    "reproduces content-content scores bitwise",
                    kRowSumTol, kPadTol));
}

// ---------------------------------------------------------------------------
// 6. Toy pretraining.
// ---------------------------------------------------------------------------

std::vector<std::vector<std::vector<int>>> toy_documents() {
    std::vector<std::vector<std::vector<int>>> docs;
    Rng rng(derive_seed(3, "acceptance-pretrain-docs"));
    for (int d = 0; d < 4; ++d) {
        std::vector<std::vector<int>> segments;
        for (int s = 0; s < 4; ++s) {
            std::vector<int> segment(10);
            for (int& id : segment) id = 2 + static_cast<int>(rng.next_below(6));
            segments.push_back(std::move(segment));
        }
        docs.push_back(std::move(segments));
    }
    return docs;
}

Outcome toy_pretraining() {
    // MLM loss must drop to at most 0.8x the first batch after 50 steps.
    TransformerConfig cfg;
    cfg.vocab = model_vocab_rows(6);
    cfg.d_model = 16;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.d_ff = 32;
    cfg.max_len = 16;
    cfg.dropout = 0.0;
    cfg.mlm_head = true;
    cfg.seed = 5;
    TransformerModel model(cfg);

    PretrainConfig pretrain_config;
    pretrain_config.steps = 50;
    pretrain_config.batch_size = 8;
    pretrain_config.opt.lr = 0.02;
    pretrain_config.seed = 9;
    const std::vector<double> trace = pretrain(model, toy_documents(), pretrain_config);
    if (trace.size() != 50) return fail(fmt("expected 50 loss entries, got %zu", trace.size()));
    for (double value : trace) {
        if (!std::isfinite(value)) return fail("non-finite pretraining loss");
    }
    if (trace.back() > kMlmLossRatio * trace.front()) {
        return fail(fmt("MLM loss %.4f -> %.4f did not reach %.1fx of the first batch",
                        trace.front(), trace.back(), kMlmLossRatio));
    }

    // Masking statistics at the 0.15 rate, 80/10/10 mix, within 3 sigma.
    const std::size_t n = 2000;
    const std::size_t real_vocab = 50;
    const int mask_id = mask_token_id(real_vocab);
    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = 2 + static_cast<int>(i % real_vocab);
    Rng mask_rng(derive_seed(11, "acceptance-masking"));
    const MlmExample example = build_mlm_example(ids, MlmObjective{}, real_vocab, mask_id, mask_rng);

    std::size_t selected = 0, masked = 0, kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (example.targets[i] < 0) continue;
        ++selected;
        if (example.ids[i] == mask_id) {
            ++masked;
        } else if (example.ids[i] == ids[i]) {
            ++kept;
        }
    }
    const auto within_3_sigma = [](double count, double n_trials, double p) {
        const double mean = n_trials * p;
        const double sigma = std::sqrt(n_trials * p * (1.0 - p));
        return std::fabs(count - mean) <= 3.0 * sigma;
    };
    if (!within_3_sigma(static_cast<double>(selected), static_cast<double>(n), 0.15)) {
        return fail(fmt("%zu of %zu positions selected; outside 3 sigma of the 0.15 rate",
                        selected, n));
    }
    if (!within_3_sigma(static_cast<double>(masked), static_cast<double>(selected), 0.8)) {
        return fail(fmt("%zu of %zu selected positions masked; outside 3 sigma of 0.8", masked,
                        selected));
    }
    // A random replacement can redraw the original token, so the observable
    // keep rate is p_keep + p_random / |V|.
    const double keep_rate = 0.1 + 0.1 / static_cast<double>(real_vocab);
    if (!within_3_sigma(static_cast<double>(kept), static_cast<double>(selected), keep_rate)) {
        return fail(fmt("%zu of %zu selected positions kept; outside 3 sigma of %.4f", kept,
                        selected, keep_rate));
    }

    // NSP pair generation is exactly balanced.
    const auto pairs =
        build_nsp_pairs(toy_documents(), 100, sep_token_id(6), derive_seed(4, "acceptance-nsp"));
    if (pairs.size() != 100) return fail(fmt("expected 100 NSP pairs, got %zu", pairs.size()));
    std::size_t positives = 0;
    for (const NspPair& pair : pairs) positives += pair.label == 1;
    if (positives != 50) {
        return fail(fmt("NSP pairs split %zu/%zu; expected exactly 50/50", positives,
                        pairs.size() - positives));
    }

    return pass(fmt("MLM loss %.4f -> %.4f over 50 steps; masking %zu/%zu/%zu of %zu within 3 "
                    "sigma; NSP pairs exactly 50/50",
                    trace.front(), trace.back(), masked, kept, selected - masked - kept, selected));
}

// ---------------------------------------------------------------------------
// 7. Distillation.
// ---------------------------------------------------------------------------

struct IdDataset {
    std::vector<std::vector<int>> train_ids, val_ids;
    std::vector<int> train_labels, val_labels;
};

IdDataset separable_ids(std::size_t n, std::uint64_t seed) {
    IdDataset data;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        std::vector<int> ids(6);
        for (int& id : ids) {
            id = label == 0 ? 2 + static_cast<int>(rng.next_below(2))
                            : 4 + static_cast<int>(rng.next_below(2));
        }
        if (i % 5 == 4) {
            data.val_ids.push_back(std::move(ids));
            data.val_labels.push_back(label);
        } else {
            data.train_ids.push_back(std::move(ids));
            data.train_labels.push_back(label);
        }
    }
    return data;
}

Outcome distillation() {
    // alpha = 1 must reduce to plain cross-entropy, value and gradient.
    Rng rng(derive_seed(13, "acceptance-distill"));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::array<double, 2> student = {rng.next_gaussian() * 2.0, rng.next_gaussian() * 2.0};
        const std::array<double, 2> teacher = {rng.next_gaussian() * 2.0, rng.next_gaussian() * 2.0};
        const int label = static_cast<int>(rng.next_below(2));
        const double temperature = 0.5 + rng.next_double() * 4.0;
        std::array<double, 2> d_distill{}, d_plain{};
        const double a = distill_loss(student, teacher, label, 1.0, temperature, &d_distill);
        const double b = softmax_ce(student, label, &d_plain);
        worst = std::max({worst, std::fabs(a - b), std::fabs(d_distill[0] - d_plain[0]),
                          std::fabs(d_distill[1] - d_plain[1])});
    }
    if (worst > kDistillTol) {
        return fail(fmt("alpha=1 distillation deviates from cross-entropy by %.3g", worst));
    }

    // A one-layer student distilled from a trained two-layer teacher.
    const IdDataset data = separable_ids(60, derive_seed(17, "acceptance-distill-data"));
    TransformerConfig teacher_cfg;
    teacher_cfg.vocab = model_vocab_rows(4);
    teacher_cfg.d_model = 16;
    teacher_cfg.heads = 2;
    teacher_cfg.layers = 2;
    teacher_cfg.d_ff = 24;
    teacher_cfg.max_len = 8;
    teacher_cfg.dropout = 0.0;
    teacher_cfg.seed = 21;
    TransformerModel teacher(teacher_cfg);

    TrainConfig train_config;
    train_config.epochs = 20;
    train_config.batch_size = 8;
    train_config.patience = 20;
    train_config.opt.lr = 0.01;
    train_config.seed = 7;
    train_classifier(teacher, data.train_ids, data.train_labels, data.val_ids, data.val_labels,
                     train_config);

    TransformerConfig student_cfg = teacher_cfg;
    student_cfg.layers = 1;
    student_cfg.seed = 22;
    TransformerModel student(student_cfg);
    const std::size_t teacher_params = param_count(teacher.params());
    const std::size_t student_params = param_count(student.params());
    if (student_params >= teacher_params) {
        return fail(fmt("student (%zu params) is not smaller than its teacher (%zu params)",
                        student_params, teacher_params));
    }
    distill(teacher, student, data.train_ids, data.train_labels, data.val_ids, data.val_labels,
            2.0, 0.5, train_config);

    std::size_t agreed = 0;
    for (const std::vector<int>& ids : data.val_ids) {
        const std::array<double, 2> t = teacher.infer_logits(ids);
        const std::array<double, 2> s = student.infer_logits(ids);
        agreed += (t[0] > t[1]) == (s[0] > s[1]);
    }
    const double agreement = static_cast<double>(agreed) / static_cast<double>(data.val_ids.size());
    if (agreement < kAgreementFloor) {
        return fail(fmt("student/teacher agreement %.3f below %.1f on held-out data", agreement,
                        kAgreementFloor));
    }
    return pass(fmt("alpha=1 matches cross-entropy within %.0e; %zu-param student agrees with its "
                    "%zu-param teacher on %.0f%% of held-out examples",
                    kDistillTol, student_params, teacher_params, agreement * 100.0));
}

// ---------------------------------------------------------------------------
// 8. Two-step pipeline mechanics.
// ---------------------------------------------------------------------------

class MarkerFilter : public TextClassifier {
public:
    MarkerFilter(double marked, double unmarked)
        : space_(LabelSpace::subjectivity()), marked_(marked), unmarked_(unmarked) {}

    const LabelSpace& label_space() const override { return space_; }
    std::string kind() const override { return "stub-filter"; }
    void fit(const std::vector<TokenList>&, const std::vector<int>&) override {}
    std::array<double, 2> predict_proba(const TokenList& doc) const override {
        const bool hit = std::find(doc.begin(), doc.end(), "opinionword") != doc.end();
        const double p = hit ? marked_ : unmarked_;
        return {1.0 - p, p};
    }

private:
    LabelSpace space_;
    double marked_;
    double unmarked_;
};

class FixedVeracity : public TextClassifier {
public:
    explicit FixedVeracity(double p_fake) : space_(LabelSpace::veracity()), p_fake_(p_fake) {}

    const LabelSpace& label_space() const override { return space_; }
    std::string kind() const override { return "stub-veracity"; }
    void fit(const std::vector<TokenList>&, const std::vector<int>&) override {}
    std::array<double, 2> predict_proba(const TokenList&) const override {
        return {p_fake_, 1.0 - p_fake_};
    }

private:
    LabelSpace space_;
    double p_fake_;
};

LabeledCorpus marker_corpus() {
    LabeledCorpus corpus(LabelSpace::veracity());
    for (int i = 0; i < 12; ++i) {
        Document doc;
        doc.id = "doc-" + std::to_string(i);
        doc.title = "title";
        doc.body = i % 3 == 0 ? "opinionword slanted rant text number " + std::to_string(i)
                              : "plain factual report text number " + std::to_string(i);
        doc.label = i % 2;
        doc.origin = "synthetic";
        corpus.add(std::move(doc));
    }
    return corpus;
}

Outcome pipeline_mechanics() {
    const LabeledCorpus corpus = marker_corpus();

    // Filtering never grows the corpus and accounts for every document.
    OpinionFilter filter;
    filter.model = std::make_shared<MarkerFilter>(0.9, 0.1);
    filter.tau = 0.5;
    const auto [kept, removed] = filter_corpus(corpus, filter, StopwordList::empty(), 2);
    if (kept.size() + removed != corpus.size() || kept.size() > corpus.size()) {
        return fail(fmt("filter_corpus lost documents: %zu kept + %zu removed of %zu",
                        kept.size(), removed, corpus.size()));
    }
    if (removed != 4) return fail(fmt("expected 4 marker documents removed, got %zu", removed));

    // Flagged documents never receive a Fake/Real verdict.
    TwoStepPipeline stub;
    stub.filter = filter;
    stub.veracity = std::make_shared<FixedVeracity>(0.8);
    for (const Document& doc : corpus.documents()) {
        const PipelineVerdict verdict = stub.classify(doc);
        const bool marked = doc.body.find("opinionword") != std::string::npos;
        if (marked && verdict.kind != VerdictKind::OpinionExcluded) {
            return fail("a filter-flagged document received a veracity verdict");
        }
        if (!marked && verdict.kind == VerdictKind::OpinionExcluded) {
            return fail("an unflagged document was excluded");
        }
    }

    // A pass-everything filter makes the two-step pipeline predict exactly
    // like the one-step model it wraps.
    const LabeledCorpus factop = generate_synthetic(40, LabelSpace::subjectivity(), 91, 0.0);
    const LabeledCorpus vtrain = generate_synthetic(40, LabelSpace::veracity(), 92, 1.0);
    PipelineTrainConfig train_config;
    train_config.filter.kind = "logreg";
    train_config.filter.features = FeatureConfig{2000, 1};
    train_config.veracity.kind = "nb";
    train_config.veracity.features = FeatureConfig{2000, 1};
    train_config.tau = 0.99;
    const TwoStepPipeline two = train_two_step(vtrain, factop, train_config);
    if (two.provenance.removed_by_filter != 0) {
        return fail(fmt("filter at tau %.2f removed %zu documents; expected none",
                        train_config.tau, two.provenance.removed_by_filter));
    }
    const auto one = make_classifier(train_config.veracity, vtrain.label_space());
    std::vector<TokenList> docs;
    std::vector<int> labels;
    corpus_tokens(vtrain, StopwordList::english(), docs, labels);
    one->fit(docs, labels);
    const LabeledCorpus probes = generate_synthetic(15, LabelSpace::veracity(), 93, 0.5);
    for (const Document& doc : probes.documents()) {
        const PipelineVerdict verdict = two.classify(doc);
        if (verdict.kind == VerdictKind::OpinionExcluded) {
            return fail("a probe was excluded despite the pass-everything threshold");
        }
        const TokenList tokens = preprocess(doc, StopwordList::english()).tokens;
        const int predicted = one->predict(tokens);
        const VerdictKind want = vtrain.label_space().names()[predicted] == "Fake"
                                     ? VerdictKind::Fake
                                     : VerdictKind::Real;
        const double confidence = one->predict_proba(tokens)[predicted];
        if (verdict.kind != want || verdict.confidence != confidence) {
            return fail("two-step and one-step predictions diverge under a pass-everything filter");
        }
    }

    // The published macro deltas reproduce exactly from their inputs.
    EvaluationReport one_report;
    one_report.metadata["run_id"] = "tableix";
    one_report.metadata["train_set"] = "isot";
    one_report.metadata["test_set"] = "combined";
    one_report.metadata["model"] = "distilroberta";
    one_report.metadata["mode"] = "one_step";
    one_report.metric_set.macro.accuracy = 0.730;
    one_report.metric_set.macro.precision = 0.741;
    one_report.metric_set.macro.recall = 0.722;
    one_report.metric_set.macro.f1 = 0.695;
    EvaluationReport two_report = one_report;
    two_report.metadata["mode"] = "two_step";
    two_report.metric_set.macro.accuracy = 0.808;
    two_report.metric_set.macro.precision = 0.812;
    two_report.metric_set.macro.recall = 0.801;
    two_report.metric_set.macro.f1 = 0.796;
    const ComparisonReport comparison = compare_two_step(one_report, two_report);
    if (std::fabs(comparison.f1.delta - 0.101) > kDeltaTol) {
        return fail(fmt("macro-F1 delta %.17g differs from 0.101 by more than %.0e",
                        comparison.f1.delta, kDeltaTol));
    }
    if (std::fabs(comparison.accuracy.delta - 0.078) > kDeltaTol) {
        return fail(fmt("accuracy delta %.17g differs from 0.078 by more than %.0e",
                        comparison.accuracy.delta, kDeltaTol));
    }
    const fs::path dir = fresh_dir("tableix");
    const RenderedComparison rendered = render_comparison(comparison, dir.string(), "tableix");
    const std::string csv = slurp(rendered.csv_path);
    if (csv.find(",f1,") == std::string::npos || csv.find(",+0.1010,") == std::string::npos) {
        return fail("comparison CSV does not render the f1 delta as +0.1010");
    }

    return pass(fmt("filtering conserves documents, flagged documents are only ever excluded, a "
                    "pass-everything filter matches one-step exactly, and the +0.101 macro-F1 "
                    "delta reproduces within %.0e",
                    kDeltaTol));
}

// ---------------------------------------------------------------------------
// 9. CLI determinism across reruns and thread counts.
// ---------------------------------------------------------------------------

Outcome cli_determinism() {
    const fs::path root = fresh_dir("cli_determinism");
    const fs::path dir_a = root / "a";
    const fs::path dir_b = root / "b";
    const fs::path dir_c = root / "c";
    const fs::path config = root / "det.json";
    spill(config, std::string(R"({
        "run_id": "det",
        "out_dir": ")") + dir_a.string() +
                        R"(",
        "seed": 13,
        "dataset": {"kind": "synthetic", "name": "syn", "n_per_class": 40, "separation": 1.0},
        "model": {
            "kind": "forest",
            "features": {"max_vocab": 2000, "min_df": 1},
            "forest": {"trees": 20, "max_depth": 12}
        }
    })");

    if (run_cli("train --config " + quoted(config) + " --threads 1", root) != 0) {
        return fail("train exited nonzero");
    }
    if (run_cli("eval --config " + quoted(config) + " --model " + quoted(dir_a / "det.model") +
                    " --train-set syn --threads 1",
                root) != 0) {
        return fail("eval exited nonzero");
    }

    const fs::path resolved = dir_a / "det_config.json";
    if (run_cli("train --config " + quoted(resolved) + " --out-dir " + quoted(dir_b) +
                    " --threads 1",
                root) != 0) {
        return fail("train from the resolved config exited nonzero");
    }
    if (run_cli("eval --config " + quoted(resolved) + " --model " + quoted(dir_b / "det.model") +
                    " --out-dir " + quoted(dir_b) + " --train-set syn --threads 1",
                root) != 0) {
        return fail("eval from the resolved config exited nonzero");
    }

    if (run_cli("train --config " + quoted(resolved) + " --out-dir " + quoted(dir_c) +
                    " --threads 8",
                root) != 0) {
        return fail("train with 8 threads exited nonzero");
    }
    if (run_cli("eval --config " + quoted(resolved) + " --model " + quoted(dir_c / "det.model") +
                    " --out-dir " + quoted(dir_c) + " --train-set syn --threads 8",
                root) != 0) {
        return fail("eval with 8 threads exited nonzero");
    }

    const char* names[] = {"det.model", "det_metrics.csv", "det_confusion.csv", "det_table.txt"};
    for (const char* name : names) {
        const std::string original = slurp(dir_a / name);
        if (original.empty()) return fail(fmt("%s missing or empty after the first run", name));
        if (slurp(dir_b / name) != original) {
            return fail(fmt("%s differs between the first run and the resolved-config rerun",
                            name));
        }
        if (slurp(dir_c / name) != original) {
            return fail(fmt("%s differs between --threads 1 and --threads 8", name));
        }
    }
    return pass("model and report files byte-identical across a resolved-config rerun and across "
                "--threads 1/8");
}

// ---------------------------------------------------------------------------
// 10. Floors on the fully separable synthetic corpus.
// ---------------------------------------------------------------------------

Outcome synthetic_floors() {
    const LabeledCorpus corpus = generate_synthetic(100, LabelSpace::veracity(), 17, 1.0);
    const SplitResult parts = split(corpus, SplitSpec{});
    const StopwordList& stop = StopwordList::english();
    std::vector<TokenList> docs;
    std::vector<int> labels;
    corpus_tokens(parts.train, stop, docs, labels);

    std::string detail;
    const auto run_model = [&](const char* name, TextClassifier& model, double floor) {
        const auto start = std::chrono::steady_clock::now();
        model.fit(docs, labels);
        const double acc = evaluate(model, parts.test, stop, 4).metric_set.macro.accuracy;
        const double secs = seconds_since(start);
        detail += fmt("%s acc=%.3f (%.1fs); ", name, acc, secs);
        if (acc < floor) return fmt("%s below its %.2f accuracy floor", name, floor);
        if (secs > kSyntheticBudget) {
            return fmt("%s exceeded the %.0fs budget", name, kSyntheticBudget);
        }
        return std::string();
    };

    {
        TfidfLogRegClassifier logreg(corpus.label_space(), FeatureConfig{5000, 1});
        const std::string err = run_model("logreg", logreg, 0.99);
        if (!err.empty()) return fail(detail + err);
    }
    {
        NeuralClassifierConfig cfg;
        cfg.arch = "transformer";
        cfg.max_vocab = 2000;
        cfg.min_df = 1;
        cfg.max_len = 32;
        cfg.d_model = 16;
        cfg.heads = 2;
        cfg.layers = 1;
        cfg.d_ff = 32;
        cfg.dropout = 0.0;
        cfg.rel_k = 4;
        cfg.val_fraction = 0.15;
        cfg.train.epochs = 20;
        cfg.train.batch_size = 16;
        cfg.train.patience = 20;
        cfg.train.opt.lr = 0.01;
        cfg.train.seed = 3;
        cfg.seed = 3;
        NeuralTextClassifier transformer(corpus.label_space(), cfg);
        const std::string err = run_model("transformer", transformer, 0.95);
        if (!err.empty()) return fail(detail + err);
    }
    {
        NeuralClassifierConfig cfg;
        cfg.arch = "lstm";
        cfg.max_vocab = 2000;
        cfg.min_df = 1;
        cfg.max_len = 32;
        cfg.d_emb = 16;
        cfg.hidden = 16;
        cfg.val_fraction = 0.15;
        cfg.train.epochs = 20;
        cfg.train.batch_size = 16;
        cfg.train.patience = 20;
        cfg.train.opt.lr = 0.01;
        cfg.train.seed = 4;
        cfg.seed = 4;
        NeuralTextClassifier lstm(corpus.label_space(), cfg);
        const std::string err = run_model("lstm", lstm, 0.95);
        if (!err.empty()) return fail(detail + err);
    }

    return pass(detail + "all synthetic floors met");
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* title;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "isot holdout baselines", isot_baselines},
        {2, "cross-dataset generalisation", cross_dataset_generalisation},
        {3, "metric oracle", metric_oracle},
        {4, "gradient checks", gradient_checks},
        {5, "attention invariants", attention_invariants},
        {6, "toy pretraining", toy_pretraining},
        {7, "distillation", distillation},
        {8, "two-step pipeline mechanics", pipeline_mechanics},
        {9, "cli determinism", cli_determinism},
        {10, "synthetic separation floors", synthetic_floors},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = fail(std::string("unhandled exception: ") + e.what());
        }
        if (outcome.status == "FAIL") ++failures;
        std::printf("criterion %2d [%s] %s: %s\n", criterion.number, outcome.status.c_str(),
                    criterion.title, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
