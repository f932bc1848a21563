#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsbench/preprocess.hpp"

namespace newsbench {

// Token -> contiguous index map fitted on a corpus. Tokens are ranked by
// (document frequency desc, token asc) and the top max_size kept; the
// tie-break is normative so construction is deterministic.
class Vocabulary {
public:
    Vocabulary() = default;

    std::size_t size() const { return tokens_.size(); }
    // -1 when out of vocabulary.
    std::int64_t index_of(const std::string& token) const;
    const std::string& token_at(std::size_t index) const { return tokens_[index]; }
    std::size_t doc_frequency(std::size_t index) const { return dfs_[index]; }
    std::size_t documents_fitted() const { return total_docs_; }
    std::size_t max_size() const { return max_size_; }
    std::size_t min_df() const { return min_df_; }

    // One "token<TAB>index<TAB>df" line per entry, sorted by index, with a
    // one-line header carrying the fitted-document count.
    void save(std::ostream& out) const;
    static Vocabulary load(std::istream& in);

    // FNV-1a 64 over the serialized form; referenced by model files.
    std::uint64_t hash() const;

    friend Vocabulary build_vocab(const std::vector<TokenList>&, std::size_t, std::size_t);

private:
    std::vector<std::string> tokens_;
    std::vector<std::size_t> dfs_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::size_t total_docs_ = 0;
    std::size_t max_size_ = 0;
    std::size_t min_df_ = 1;
};

// Sorted (index, weight) pairs; no explicit zeros.
class SparseVector {
public:
    SparseVector() = default;
    SparseVector(std::vector<std::pair<std::uint32_t, double>> entries, std::uint32_t dim);

    const std::vector<std::pair<std::uint32_t, double>>& entries() const { return entries_; }
    std::uint32_t dim() const { return dim_; }
    bool empty() const { return entries_.empty(); }
    double l2_norm() const;

private:
    std::vector<std::pair<std::uint32_t, double>> entries_;
    std::uint32_t dim_ = 0;
};

// idf(t) = ln((1 + N) / (1 + df(t))) + 1; transformed vectors are
// L2-normalized (empty documents map to the zero vector).
class TfidfModel {
public:
    const Vocabulary& vocabulary() const { return vocab_; }
    double idf(std::size_t index) const { return idf_[index]; }

    friend TfidfModel fit_tfidf(const std::vector<TokenList>&, Vocabulary);
    friend TfidfModel make_tfidf(Vocabulary);
    friend class ModelCodec;

private:
    Vocabulary vocab_;
    std::vector<double> idf_;
};

// Fixed-length integer encoding: id 0 = padding, 1 = out-of-vocabulary,
// vocabulary index i maps to i + 2. Tail beyond max_len is truncated.
struct SequenceEncoding {
    std::vector<std::uint32_t> ids;  // length exactly max_len
    std::size_t max_len = 0;
    std::size_t actual_len = 0;
};

inline constexpr std::uint32_t kPadId = 0;
inline constexpr std::uint32_t kOovId = 1;
inline constexpr std::uint32_t kSequenceIdOffset = 2;

Vocabulary build_vocab(const std::vector<TokenList>& corpus_tokens, std::size_t max_size,
                       std::size_t min_df);

SparseVector count_vector(const TokenList& tokens, const Vocabulary& vocab);

TfidfModel fit_tfidf(const std::vector<TokenList>& corpus_tokens, Vocabulary vocab);

// Builds the model from the vocabulary's own df counts (equivalent to
// fit_tfidf on the corpus the vocabulary was fitted on).
TfidfModel make_tfidf(Vocabulary vocab);

SparseVector tfidf_transform(const TokenList& tokens, const TfidfModel& model);

SequenceEncoding encode_sequence(const TokenList& tokens, const Vocabulary& vocab,
                                 std::size_t max_len);

}  // namespace newsbench
