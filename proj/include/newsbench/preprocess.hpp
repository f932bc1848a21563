#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "newsbench/corpus.hpp"

namespace newsbench {

using TokenList = std::vector<std::string>;

// Fixed, versioned stopword list. Entries are lowercase and free of
// whitespace; the shipped English list has 179 entries (see docs/FORMATS.md).
class StopwordList {
public:
    static const StopwordList& english();  // "english-179", embedded
    static StopwordList empty();           // filters nothing

    StopwordList(std::string name, std::vector<std::string> entries);

    bool contains(const std::string& token) const { return set_.count(token) != 0; }
    const std::string& name() const { return name_; }
    const std::vector<std::string>& entries() const { return entries_; }

private:
    std::string name_;
    std::vector<std::string> entries_;
    std::unordered_set<std::string> set_;
};

struct CleanDocument {
    std::string id;
    TokenList tokens;
    std::size_t original_length = 0;  // token count before stopword removal
};

// Cleaning chain, applied in this order (normative):
//   1. URL removal      scheme://... and www.... up to the next whitespace
//   2. IPv4 removal     four dot-separated 1-3 digit groups, not digit-adjacent
//   3. punctuation      each of the 32 ASCII punctuation characters -> space
//   4. whitespace       runs collapse to one space, ends trimmed
//   5. lowercase        ASCII A-Z only
// Bytes >= 0x80 pass through untouched.
std::string clean_text(const std::string& text);

// Splits on runs of ASCII whitespace; never yields empty tokens.
TokenList tokenize(const std::string& text);

// Order-preserving filter.
TokenList remove_stopwords(const TokenList& tokens, const StopwordList& list);

// clean_text -> tokenize -> remove_stopwords over the document body.
CleanDocument preprocess(const Document& doc, const StopwordList& list);

}  // namespace newsbench
