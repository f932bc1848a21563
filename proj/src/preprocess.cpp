#include "newsbench/preprocess.hpp"

#include <cctype>

#include "newsbench/errors.hpp"

namespace newsbench {

namespace {

const char* const kEnglishStopwords[] = {
    "i",         "me",        "my",       "myself",     "we",        "our",      "ours",      "ourselves",
    "you",       "you're",    "you've",   "you'll",     "you'd",     "your",     "yours",     "yourself",
    "yourselves", "he",       "him",      "his",        "himself",   "she",      "she's",     "her",
    "hers",      "herself",   "it",       "it's",       "its",       "itself",   "they",      "them",
    "their",     "theirs",    "themselves", "what",     "which",     "who",      "whom",      "this",
    "that",      "that'll",   "these",    "those",      "am",        "is",       "are",       "was",
    "were",      "be",        "been",     "being",      "have",      "has",      "had",       "having",
    "do",        "does",      "did",      "doing",      "a",         "an",       "the",       "and",
    "but",       "if",        "or",       "because",    "as",        "until",    "while",     "of",
    "at",        "by",        "for",      "with",       "about",     "against",  "between",   "into",
    "through",   "during",    "before",   "after",      "above",     "below",    "to",        "from",
    "up",        "down",      "in",       "out",        "on",        "off",      "over",      "under",
    "again",     "further",   "then",     "once",       "here",      "there",    "when",      "where",
    "why",       "how",       "all",      "any",        "both",      "each",     "few",       "more",
    "most",      "other",     "some",     "such",       "no",        "nor",      "not",       "only",
    "own",       "same",      "so",       "than",       "too",       "very",     "s",         "t",
    "can",       "will",      "just",     "don",        "don't",     "should",   "should've", "now",
    "d",         "ll",        "m",        "o",          "re",        "ve",       "y",         "ain",
    "aren",      "aren't",    "couldn",   "couldn't",   "didn",      "didn't",   "doesn",     "doesn't",
    "hadn",      "hadn't",    "hasn",     "hasn't",     "haven",     "haven't",  "isn",       "isn't",
    "ma",        "mightn",    "mightn't", "mustn",      "mustn't",   "needn",    "needn't",   "shan",
    "shan't",    "shouldn",   "shouldn't", "wasn",      "wasn't",    "weren",    "weren't",   "won",
    "won't",     "wouldn",    "wouldn't"};

bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
    return c < 0x80 && std::ispunct(c) != 0;
}

bool is_scheme_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '+' || c == '.' || c == '-';
}

// Marks [start, end) of every URL occurrence in `text`.
void mark_urls(const std::string& text, std::vector<char>& removed) {
    const std::size_t n = text.size();
    for (std::size_t i = 0; i + 2 < n; ++i) {
        if (text[i] == ':' && text[i + 1] == '/' && text[i + 2] == '/') {
            std::size_t start = i;
            while (start > 0 && is_scheme_char(static_cast<unsigned char>(text[start - 1]))) --start;
            std::size_t end = i + 3;
            while (end < n && !is_ascii_space(static_cast<unsigned char>(text[end]))) ++end;
            for (std::size_t k = start; k < end; ++k) removed[k] = 1;
        }
    }
    for (std::size_t i = 0; i + 3 < n; ++i) {
        bool www = (text[i] == 'w' || text[i] == 'W') && (text[i + 1] == 'w' || text[i + 1] == 'W') &&
                   (text[i + 2] == 'w' || text[i + 2] == 'W') && text[i + 3] == '.';
        if (!www) continue;
        if (i > 0 && std::isalnum(static_cast<unsigned char>(text[i - 1])) != 0) continue;
        std::size_t end = i + 4;
        while (end < n && !is_ascii_space(static_cast<unsigned char>(text[end]))) ++end;
        for (std::size_t k = i; k < end; ++k) removed[k] = 1;
    }
}

// IPv4: four dot-separated groups of 1-3 digits, not adjacent to a digit.
void mark_ips(const std::string& text, std::vector<char>& removed) {
    const std::size_t n = text.size();
    auto digit = [&](std::size_t i) { return i < n && std::isdigit(static_cast<unsigned char>(text[i])) != 0; };
    for (std::size_t i = 0; i < n; ++i) {
        if (!digit(i)) continue;
        if (i > 0 && digit(i - 1)) continue;
        std::size_t pos = i;
        bool ok = true;
        for (int group = 0; group < 4 && ok; ++group) {
            std::size_t len = 0;
            while (len < 3 && digit(pos + len)) ++len;
            if (len == 0 || digit(pos + len)) {
                ok = false;
                break;
            }
            pos += len;
            if (group < 3) {
                if (pos < n && text[pos] == '.') ++pos;
                else ok = false;
            }
        }
        if (ok && !digit(pos)) {
            for (std::size_t k = i; k < pos; ++k) removed[k] = 1;
        }
    }
}

}  // namespace

StopwordList::StopwordList(std::string name, std::vector<std::string> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        for (unsigned char c : e) {
            if (is_ascii_space(c)) throw ConfigError("stopword entry contains whitespace: '" + e + "'");
            if (c < 0x80 && std::isupper(c)) throw ConfigError("stopword entry not lowercase: '" + e + "'");
        }
        set_.insert(e);
    }
}

const StopwordList& StopwordList::english() {
    static const StopwordList list("english-179",
                                   std::vector<std::string>(std::begin(kEnglishStopwords),
                                                            std::end(kEnglishStopwords)));
    return list;
}

StopwordList StopwordList::empty() { return StopwordList("none", {}); }

std::string clean_text(const std::string& text) {
    std::vector<char> removed(text.size(), 0);
    mark_urls(text, removed);
    mark_ips(text, removed);

    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (removed[i] || is_ascii_punct(c) || is_ascii_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : text[i]);
    }
    return out;
}

TokenList tokenize(const std::string& text) {
    TokenList tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_ascii_space(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(static_cast<char>(c));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TokenList remove_stopwords(const TokenList& tokens, const StopwordList& list) {
    TokenList kept;
    kept.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!list.contains(t)) kept.push_back(t);
    return kept;
}

CleanDocument preprocess(const Document& doc, const StopwordList& list) {
    CleanDocument clean;
    clean.id = doc.id;
    TokenList tokens = tokenize(clean_text(doc.body));
    clean.original_length = tokens.size();
    clean.tokens = remove_stopwords(tokens, list);
    return clean;
}

}  // namespace newsbench
