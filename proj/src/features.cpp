#include "newsbench/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "newsbench/errors.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

std::int64_t Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vocabulary::save(std::ostream& out) const {
    out << "# newsbench vocabulary v1 docs=" << total_docs_ << " max_size=" << max_size_
        << " min_df=" << min_df_ << "\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        out << tokens_[i] << '\t' << i << '\t' << dfs_[i] << '\n';
}

Vocabulary Vocabulary::load(std::istream& in) {
    Vocabulary vocab;
    std::string header;
    if (!std::getline(in, header) || header.rfind("# newsbench vocabulary v1", 0) != 0)
        throw DataError("not a vocabulary file");
    std::istringstream hs(header);
    std::string word;
    while (hs >> word) {
        auto eq = word.find('=');
        if (eq == std::string::npos) continue;
        std::string key = word.substr(0, eq);
        std::size_t value = static_cast<std::size_t>(std::stoull(word.substr(eq + 1)));
        if (key == "docs") vocab.total_docs_ = value;
        else if (key == "max_size") vocab.max_size_ = value;
        else if (key == "min_df") vocab.min_df_ = value;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto t1 = line.find('\t');
        auto t2 = line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw DataError("malformed vocabulary line: " + line);
        std::string token = line.substr(0, t1);
        std::size_t index = static_cast<std::size_t>(std::stoull(line.substr(t1 + 1, t2 - t1 - 1)));
        std::size_t df = static_cast<std::size_t>(std::stoull(line.substr(t2 + 1)));
        if (index != vocab.tokens_.size()) throw DataError("vocabulary indices not contiguous");
        vocab.index_[token] = static_cast<std::uint32_t>(index);
        vocab.tokens_.push_back(std::move(token));
        vocab.dfs_.push_back(df);
    }
    return vocab;
}

std::uint64_t Vocabulary::hash() const {
    std::ostringstream ss;
    save(ss);
    return fnv1a64(ss.str());
}

Vocabulary build_vocab(const std::vector<TokenList>& corpus_tokens, std::size_t max_size,
                       std::size_t min_df) {
    if (max_size < 1) throw ConfigError("max_size must be at least 1");
    if (min_df < 1) throw ConfigError("min_df must be at least 1");
    if (corpus_tokens.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

    std::unordered_map<std::string, std::size_t> df;
    std::unordered_set<std::string> seen;
    for (const auto& doc : corpus_tokens) {
        seen.clear();
        for (const auto& tok : doc)
            if (seen.insert(tok).second) ++df[tok];
    }

    std::vector<std::pair<std::string, std::size_t>> ranked;
    ranked.reserve(df.size());
    for (auto& kv : df)
        if (kv.second >= min_df) ranked.emplace_back(kv.first, kv.second);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_size) ranked.resize(max_size);

    Vocabulary vocab;
    vocab.total_docs_ = corpus_tokens.size();
    vocab.max_size_ = max_size;
    vocab.min_df_ = min_df;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        vocab.index_[ranked[i].first] = static_cast<std::uint32_t>(i);
        vocab.tokens_.push_back(std::move(ranked[i].first));
        vocab.dfs_.push_back(ranked[i].second);
    }
    return vocab;
}

SparseVector::SparseVector(std::vector<std::pair<std::uint32_t, double>> entries, std::uint32_t dim)
    : entries_(std::move(entries)), dim_(dim) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].second == 0.0) throw DataError("sparse vector stores a zero weight");
        if (entries_[i].first >= dim_) throw DataError("sparse vector index out of range");
        if (i > 0 && entries_[i - 1].first >= entries_[i].first)
            throw DataError("sparse vector indices not strictly increasing");
    }
}

double SparseVector::l2_norm() const {
    double sq = 0.0;
    for (const auto& [_, w] : entries_) sq += w * w;
    return std::sqrt(sq);
}

SparseVector count_vector(const TokenList& tokens, const Vocabulary& vocab) {
    std::unordered_map<std::uint32_t, double> counts;
    for (const auto& tok : tokens) {
        std::int64_t idx = vocab.index_of(tok);
        if (idx >= 0) counts[static_cast<std::uint32_t>(idx)] += 1.0;
    }
    std::vector<std::pair<std::uint32_t, double>> entries(counts.begin(), counts.end());
    std::sort(entries.begin(), entries.end());
    return SparseVector(std::move(entries), static_cast<std::uint32_t>(vocab.size()));
}

TfidfModel fit_tfidf(const std::vector<TokenList>& corpus_tokens, Vocabulary vocab) {
    if (corpus_tokens.empty()) throw DataError("cannot fit tf-idf on an empty corpus");
    std::vector<std::size_t> df(vocab.size(), 0);
    std::unordered_set<std::int64_t> seen;
    for (const auto& doc : corpus_tokens) {
        seen.clear();
        for (const auto& tok : doc) {
            std::int64_t idx = vocab.index_of(tok);
            if (idx >= 0 && seen.insert(idx).second) ++df[static_cast<std::size_t>(idx)];
        }
    }
    TfidfModel model;
    model.vocab_ = std::move(vocab);
    const double n = static_cast<double>(corpus_tokens.size());
    model.idf_.resize(model.vocab_.size());
    for (std::size_t i = 0; i < model.idf_.size(); ++i)
        model.idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
    return model;
}

TfidfModel make_tfidf(Vocabulary vocab) {
    TfidfModel model;
    const double n = static_cast<double>(vocab.documents_fitted());
    model.idf_.resize(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i)
        model.idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.doc_frequency(i)))) + 1.0;
    model.vocab_ = std::move(vocab);
    return model;
}

SparseVector tfidf_transform(const TokenList& tokens, const TfidfModel& model) {
    SparseVector counts = count_vector(tokens, model.vocabulary());
    std::vector<std::pair<std::uint32_t, double>> entries = counts.entries();
    double sq = 0.0;
    for (auto& [idx, w] : entries) {
        w *= model.idf(idx);
        sq += w * w;
    }
    if (sq > 0.0) {
        double inv = 1.0 / std::sqrt(sq);
        for (auto& [_, w] : entries) w *= inv;
    }
    return SparseVector(std::move(entries), static_cast<std::uint32_t>(model.vocabulary().size()));
}

SequenceEncoding encode_sequence(const TokenList& tokens, const Vocabulary& vocab,
                                 std::size_t max_len) {
    if (max_len < 1) throw ConfigError("max_len must be at least 1");
    SequenceEncoding enc;
    enc.max_len = max_len;
    enc.ids.assign(max_len, kPadId);
    enc.actual_len = std::min(tokens.size(), max_len);
    for (std::size_t i = 0; i < enc.actual_len; ++i) {
        std::int64_t idx = vocab.index_of(tokens[i]);
        enc.ids[i] = idx < 0 ? kOovId : static_cast<std::uint32_t>(idx) + kSequenceIdOffset;
    }
    return enc;
}

}  // namespace newsbench
