#include "newsbench/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "newsbench/csv.hpp"
#include "newsbench/errors.hpp"
#include "newsbench/rng.hpp"

namespace newsbench {

LabelSpace LabelSpace::veracity() {
    return LabelSpace(LabelKind::Veracity, {"Fake", "Real"}, 0);
}

LabelSpace LabelSpace::subjectivity() {
    return LabelSpace(LabelKind::Subjectivity, {"Fact", "Opinion"}, 1);
}

void LabelSpace::set_positive(int idx) {
    if (idx != 0 && idx != 1) throw ConfigError("positive class must be 0 or 1");
    positive_ = idx;
}

int LabelSpace::parse_label(const std::string& text) const {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (int i = 0; i < 2; ++i) {
        std::string name;
        for (char c : names_[i]) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (lower == name) return i;
    }
    return -1;
}

void LabeledCorpus::add(Document doc) {
    if (doc.body.empty()) throw DataError("document '" + doc.id + "' has empty body");
    if (doc.label && (*doc.label < 0 || *doc.label > 1))
        throw DataError("document '" + doc.id + "' label outside label space");
    if (!ids_.insert(doc.id).second) throw DataError("duplicate document id '" + doc.id + "'");
    docs_.push_back(std::move(doc));
}

std::array<std::size_t, 2> LabeledCorpus::label_counts() const {
    std::array<std::size_t, 2> counts = {0, 0};
    for (const auto& d : docs_)
        if (d.label) ++counts[*d.label];
    return counts;
}

void SplitSpec::validate() const {
    auto in_open_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_open_unit(train_fraction) || !in_open_unit(val_fraction) || !in_open_unit(test_fraction))
        throw ConfigError("split fractions must lie in (0,1)");
    double sum = train_fraction + val_fraction + test_fraction;
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

namespace {

std::vector<std::string> require_header(CsvReader& reader, const std::vector<std::string>& required,
                                        const std::string& path) {
    auto header = reader.next();
    if (!header) throw DataError("empty CSV file: " + path);
    for (const auto& col : required) {
        if (std::find(header->begin(), header->end(), col) == header->end())
            throw DataError("missing required column '" + col + "' in " + path);
    }
    return *header;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return static_cast<std::size_t>(it - header.begin());
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

void load_isot_file(const std::string& path, int label, const std::string& id_prefix,
                    LabeledCorpus& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    CsvReader reader(in);
    auto header = require_header(reader, {"title", "text", "subject", "date"}, path);
    std::size_t title_col = column_index(header, "title");
    std::size_t text_col = column_index(header, "text");

    std::size_t row = 0;
    while (auto record = reader.next()) {
        ++row;
        if (record->size() == 1 && blank((*record)[0])) continue;  // trailing blank line
        if (record->size() < header.size())
            throw DataError(path + ": row " + std::to_string(row) + " has too few fields");
        const std::string& title = (*record)[title_col];
        const std::string& text = (*record)[text_col];
        if (blank(text)) {
            corpus.note_skipped_row();
            continue;
        }
        Document doc;
        doc.id = id_prefix + std::to_string(row);
        doc.title = title;
        doc.body = blank(title) ? text : title + " " + text;
        doc.label = label;
        doc.origin = "isot";
        corpus.add(std::move(doc));
    }
}

}  // namespace

LabeledCorpus load_isot(const std::string& fake_csv_path, const std::string& real_csv_path) {
    LabeledCorpus corpus(LabelSpace::veracity());
    load_isot_file(fake_csv_path, 0, "isot-fake-", corpus);
    load_isot_file(real_csv_path, 1, "isot-real-", corpus);
    return corpus;
}

LabeledCorpus load_canonical(const std::string& path, const LabelSpace& space) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    CsvReader reader(in);
    auto header = require_header(reader, {"id", "title", "text", "label"}, path);
    std::size_t id_col = column_index(header, "id");
    std::size_t title_col = column_index(header, "title");
    std::size_t text_col = column_index(header, "text");
    std::size_t label_col = column_index(header, "label");

    LabeledCorpus corpus(space);
    std::size_t row = 0;
    while (auto record = reader.next()) {
        ++row;
        if (record->size() == 1 && blank((*record)[0])) continue;
        if (record->size() < header.size())
            throw DataError(path + ": row " + std::to_string(row) + " has too few fields");
        const std::string& id = (*record)[id_col];
        const std::string& text = (*record)[text_col];
        const std::string& label_text = (*record)[label_col];
        if (blank(text)) throw DataError(path + ": row " + std::to_string(row) + " has empty text");
        int label = space.parse_label(label_text);
        if (label < 0)
            throw DataError(path + ": unknown label '" + label_text + "' (row " + std::to_string(row) + ")");
        Document doc;
        doc.id = id;
        doc.title = (*record)[title_col];
        doc.body = blank(doc.title) ? text : doc.title + " " + text;
        doc.label = label;
        doc.origin = "canonical";
        corpus.add(std::move(doc));
    }
    return corpus;
}

namespace {

// Largest-remainder allocation of `total` items over per-group ideals.
std::vector<std::size_t> apportion(const std::vector<double>& ideals, std::size_t total) {
    std::vector<std::size_t> alloc(ideals.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < ideals.size(); ++i) {
        alloc[i] = static_cast<std::size_t>(std::floor(ideals[i]));
        assigned += alloc[i];
        remainders.emplace_back(ideals[i] - std::floor(ideals[i]), i);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++alloc[remainders[k % remainders.size()].second];
    while (assigned > total) {
        // Over-allocation cannot happen with floor(), kept as a guard.
        for (auto& a : alloc)
            if (assigned > total && a > 0) { --a; --assigned; }
    }
    return alloc;
}

}  // namespace

SplitResult split(const LabeledCorpus& corpus, const SplitSpec& spec) {
    spec.validate();
    if (corpus.size() < 3) throw DataError("corpus too small to split (need at least 3 documents)");

    const std::size_t n = corpus.size();
    const std::size_t n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    const std::size_t n_val = static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(n)));
    const std::size_t n_test = n - n_train - n_val;

    // part_of[i]: 0 train, 1 val, 2 test
    std::vector<int> part_of(n, -1);

    if (spec.stratified) {
        std::array<std::vector<std::size_t>, 2> by_label;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& d = corpus.documents()[i];
            if (!d.label) throw DataError("stratified split requires labelled documents");
            by_label[*d.label].push_back(i);
        }
        std::vector<double> train_ideals, val_ideals;
        for (int l = 0; l < 2; ++l) {
            train_ideals.push_back(spec.train_fraction * static_cast<double>(by_label[l].size()));
            val_ideals.push_back(spec.val_fraction * static_cast<double>(by_label[l].size()));
        }
        auto train_alloc = apportion(train_ideals, n_train);
        auto val_alloc = apportion(val_ideals, n_val);
        for (int l = 0; l < 2; ++l) {
            if (train_alloc[l] + val_alloc[l] > by_label[l].size())
                throw DataError("label class too small for requested split");
            Rng rng(derive_seed(derive_seed(spec.seed, "split"), static_cast<std::uint64_t>(l)));
            rng.shuffle(by_label[l]);
            std::size_t pos = 0;
            for (std::size_t k = 0; k < train_alloc[l]; ++k) part_of[by_label[l][pos++]] = 0;
            for (std::size_t k = 0; k < val_alloc[l]; ++k) part_of[by_label[l][pos++]] = 1;
            for (; pos < by_label[l].size(); ++pos) part_of[by_label[l][pos]] = 2;
        }
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        Rng rng(derive_seed(spec.seed, "split"));
        rng.shuffle(order);
        for (std::size_t k = 0; k < n; ++k)
            part_of[order[k]] = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
    }

    SplitResult result{LabeledCorpus(corpus.label_space()), LabeledCorpus(corpus.label_space()),
                       LabeledCorpus(corpus.label_space())};
    for (std::size_t i = 0; i < n; ++i) {
        LabeledCorpus& target = part_of[i] == 0 ? result.train : (part_of[i] == 1 ? result.val : result.test);
        target.add(corpus.documents()[i]);
    }
    (void)n_test;
    return result;
}

DatasetStats stats(const LabeledCorpus& corpus) {
    DatasetStats s;
    s.total = corpus.size();
    s.per_label = corpus.label_counts();
    s.skipped_rows = corpus.skipped_rows();
    if (corpus.empty()) return s;

    std::vector<std::size_t> lengths;
    lengths.reserve(corpus.size());
    std::unordered_set<std::string> vocab;
    double total_tokens = 0.0;
    for (const auto& d : corpus.documents()) {
        std::istringstream ss(d.body);
        std::string tok;
        std::size_t count = 0;
        while (ss >> tok) {
            ++count;
            vocab.insert(tok);
        }
        lengths.push_back(count);
        total_tokens += static_cast<double>(count);
    }
    s.mean_body_tokens = total_tokens / static_cast<double>(corpus.size());
    std::sort(lengths.begin(), lengths.end());
    std::size_t mid = lengths.size() / 2;
    s.median_body_tokens = lengths.size() % 2 == 1
                               ? static_cast<double>(lengths[mid])
                               : (static_cast<double>(lengths[mid - 1]) + static_cast<double>(lengths[mid])) / 2.0;
    s.vocabulary_estimate = vocab.size();
    return s;
}

namespace {

// Fixed pools for the synthetic oracle corpus. Class pools are disjoint from
// each other and from the shared pool; none of the words is a stopword.
const std::vector<std::string>& class_pool(int label) {
    static const std::vector<std::string> pool0 = {
        "senate",   "ballot",   "governor", "treaty",    "congress", "minister", "campaign", "policy",
        "reform",   "election", "mayor",    "embassy",   "tariff",   "budget",   "veto",     "diplomat",
        "caucus",   "statute",  "province", "parliament", "council",  "audit",    "customs",  "borough",
        "precinct", "lobbyist", "mandate",  "quorum",    "republic", "premier",  "senator",  "delegate",
        "tribunal", "decree",   "amnesty",  "charter",   "envoy",    "regime",   "coalition", "petition"};
    static const std::vector<std::string> pool1 = {
        "striker",  "goalkeeper", "tournament", "playoff",  "stadium",  "referee",  "inning",  "marathon",
        "sprint",   "roster",     "dugout",     "fixture",  "penalty",  "halftime", "batting", "bowler",
        "wicket",   "quarterback", "touchdown", "homerun",  "freekick", "podium",   "medal",   "relay",
        "coach",    "captaincy",  "transfer",   "league",   "derby",    "keeper",   "winger",  "defender",
        "midfield", "umpire",     "scoreline",  "clubhouse", "paddock",  "grid",     "lap",     "qualifier"};
    return label == 0 ? pool0 : pool1;
}

const std::vector<std::string>& shared_pool() {
    static const std::vector<std::string> pool = {
        "report",  "people",  "city",    "week",   "group",   "official", "statement", "public",
        "country", "company", "market",  "record", "program", "project",  "service",   "system",
        "member",  "leader",  "event",   "plan",   "money",   "street",   "school",    "family",
        "worker",  "house",   "water",   "power",  "press",   "media",    "story",     "issue",
        "change",  "result",  "number",  "figure", "region",  "season",   "moment",    "effort"};
    return pool;
}

// Zipf-like weights keep the unigram distribution skewed, which matters for
// the language-model pretraining oracle.
std::size_t zipf_draw(Rng& rng, std::size_t n) {
    static thread_local std::vector<double> cdf;
    cdf.clear();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += 1.0 / std::pow(static_cast<double>(i + 1), 1.2);
        cdf.push_back(total);
    }
    double u = rng.next_double() * total;
    return static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

}  // namespace

LabeledCorpus generate_synthetic(std::size_t n_per_class, const LabelSpace& space,
                                 std::uint64_t seed, double separation) {
    if (n_per_class < 1) throw ConfigError("n_per_class must be at least 1");
    if (separation < 0.0 || separation > 1.0) throw ConfigError("separation must lie in [0,1]");

    LabeledCorpus corpus(space);
    Rng rng(derive_seed(seed, "synthetic"));
    for (std::size_t i = 0; i < n_per_class; ++i) {
        for (int label = 0; label < 2; ++label) {
            const auto& own = class_pool(label);
            const auto& shared = shared_pool();
            auto draw_word = [&]() -> const std::string& {
                if (rng.next_bernoulli(separation)) return own[zipf_draw(rng, own.size())];
                return shared[zipf_draw(rng, shared.size())];
            };
            std::size_t sentences = 3 + rng.next_below(4);
            std::string body;
            for (std::size_t s = 0; s < sentences; ++s) {
                std::size_t words = 6 + rng.next_below(9);
                for (std::size_t w = 0; w < words; ++w) {
                    if (w) body += ' ';
                    body += draw_word();
                }
                body += ". ";
            }
            if (!body.empty() && body.back() == ' ') body.pop_back();

            std::string title = draw_word();
            title += ' ';
            title += draw_word();

            Document doc;
            std::string label_name = space.names()[label];
            for (auto& ch : label_name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            doc.id = "synthetic-" + label_name + "-" + std::to_string(i);
            doc.title = title;
            doc.body = title + " " + body;
            doc.label = label;
            doc.origin = "synthetic";
            corpus.add(std::move(doc));
        }
    }
    return corpus;
}

}  // namespace newsbench
