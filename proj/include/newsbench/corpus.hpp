#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace newsbench {

// Binary label space. Label values are indices into names().
enum class LabelKind { Veracity, Subjectivity };

class LabelSpace {
public:
    static LabelSpace veracity();      // {Fake, Real}, positive = Fake
    static LabelSpace subjectivity();  // {Fact, Opinion}, positive = Opinion

    LabelKind kind() const { return kind_; }
    const std::array<std::string, 2>& names() const { return names_; }
    int positive() const { return positive_; }
    int negative() const { return 1 - positive_; }
    void set_positive(int idx);

    // Case-insensitive lookup ("fake", "Real", ...); -1 when unknown.
    int parse_label(const std::string& text) const;

    bool operator==(const LabelSpace& other) const {
        return kind_ == other.kind_ && positive_ == other.positive_;
    }

private:
    LabelSpace(LabelKind kind, std::array<std::string, 2> names, int positive)
        : kind_(kind), names_(std::move(names)), positive_(positive) {}

    LabelKind kind_;
    std::array<std::string, 2> names_;
    int positive_;
};

struct Document {
    std::string id;
    std::string title;
    std::string body;              // non-empty after ingestion
    std::optional<int> label;      // index into the corpus label space
    std::string origin;            // "isot", "cc", "factop", "synthetic"
};

class LabeledCorpus {
public:
    explicit LabeledCorpus(LabelSpace space) : space_(std::move(space)) {}

    // Rejects empty bodies, duplicate ids and labels outside the space.
    void add(Document doc);

    const std::vector<Document>& documents() const { return docs_; }
    const LabelSpace& label_space() const { return space_; }
    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    std::array<std::size_t, 2> label_counts() const;
    std::size_t skipped_rows() const { return skipped_rows_; }
    void note_skipped_row() { ++skipped_rows_; }

private:
    LabelSpace space_;
    std::vector<Document> docs_;
    std::unordered_set<std::string> ids_;
    std::size_t skipped_rows_ = 0;
};

struct SplitSpec {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
    bool stratified = true;

    void validate() const;  // fractions in (0,1), sum to 1 within 1e-9
};

struct SplitResult {
    LabeledCorpus train;
    LabeledCorpus val;
    LabeledCorpus test;
};

struct DatasetStats {
    std::size_t total = 0;
    std::array<std::size_t, 2> per_label = {0, 0};
    std::size_t skipped_rows = 0;
    double mean_body_tokens = 0.0;
    double median_body_tokens = 0.0;
    std::size_t vocabulary_estimate = 0;
};

// ISOT format: CSV with header title,text,subject,date. All rows of the fake
// file are labelled Fake, all rows of the real file Real. Document body is
// title + " " + text; rows with empty text are skipped and counted.
LabeledCorpus load_isot(const std::string& fake_csv_path, const std::string& real_csv_path);

// Canonical interchange format: CSV with header id,title,text,label.
LabeledCorpus load_canonical(const std::string& path, const LabelSpace& space);

// Deterministic partition. Sizes: train = floor(train_fraction * N),
// val = floor(val_fraction * N), test = remainder. Stratified by default;
// per-label allocations use largest-remainder rounding against those totals.
SplitResult split(const LabeledCorpus& corpus, const SplitSpec& spec);

DatasetStats stats(const LabeledCorpus& corpus);

// Test-oracle corpus: two classes drawn from fixed word pools. separation
// in [0,1] is the probability a token comes from the class-specific pool
// rather than the shared one; separation = 1.0 gives disjoint vocabularies.
LabeledCorpus generate_synthetic(std::size_t n_per_class, const LabelSpace& space,
                                 std::uint64_t seed, double separation);

}  // namespace newsbench
