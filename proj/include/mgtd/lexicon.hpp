#pragma once

// Term -> category lexicons and the per-token rate features built on them.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mgtd/asset_store.hpp"
#include "mgtd/error.hpp"
#include "mgtd/textstats.hpp"

namespace mgtd {

inline constexpr std::array<std::string_view, 5> kBiasCategories = {"bias_words", "assertives", "factives", "hedges",
                                                                    "implicatives"};
inline constexpr std::array<std::string_view, 2> kOpinionCategories = {"opinion_positive", "opinion_negative"};
inline constexpr std::array<std::string_view, 10> kMoralCategories = {
    "harm", "fairness", "cheating", "loyalty", "betrayal", "authority", "subversion", "purity", "degradation",
    "morality_general"};
inline constexpr std::array<std::string_view, 6> kSentimentCategories = {
    "weak_negative", "weak_positive", "weak_neutral", "strong_negative", "strong_positive", "strong_neutral"};

/// One lexicon file. A term ending in '*' is a prefix entry matching any
/// token that starts with the stem.
struct LexiconSet {
    std::string name;
    std::map<std::string, std::string> entries;
    std::set<std::string> categories;
    std::vector<std::string> warnings;

    std::size_t size() const { return entries.size(); }
};

struct LexiconFeatureVector {
    std::map<std::string, double> rates;

    double operator[](const std::string& category) const {
        auto it = rates.find(category);
        return it == rates.end() ? 0.0 : it->second;
    }
};

inline LexiconSet parse_lexicon(std::istream& in, std::string name) {
    LexiconSet lex;
    lex.name = std::move(name);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw Error(ErrorCode::MalformedLine, lex.name + ":" + std::to_string(line_no) + ": expected term<TAB>category");
        std::string term = detail::lower(trim(std::string_view(line).substr(0, tab)));
        std::string category = trim(std::string_view(line).substr(tab + 1));
        if (term.empty() || category.empty() || term == "*")
            throw Error(ErrorCode::MalformedLine, lex.name + ":" + std::to_string(line_no) + ": empty term or category");
        // collapse internal whitespace runs in multiword terms
        std::string norm;
        for (const auto& tok : tokenize(term)) norm += (norm.empty() ? "" : " ") + tok;
        if (term.back() == '*') norm += '*';
        if (norm.empty() || norm == "*")
            throw Error(ErrorCode::MalformedLine, lex.name + ":" + std::to_string(line_no) + ": term has no word characters");
        auto [it, inserted] = lex.entries.emplace(norm, category);
        if (!inserted && it->second != category)
            throw Error(ErrorCode::ConflictingDuplicate,
                        lex.name + ": '" + norm + "' listed under " + it->second + " and " + category);
        lex.categories.insert(category);
    }
    if (lex.entries.empty()) lex.warnings.push_back(lex.name + ": lexicon is empty");
    return lex;
}

inline LexiconSet load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
    return parse_lexicon(in, path.filename().string());
}

/// Compiled union of lexicon files. The same term may belong to categories
/// from different files.
class LexiconGroup {
public:
    LexiconGroup() = default;
    explicit LexiconGroup(std::string name, const std::vector<LexiconSet>& sets = {}) : name_(std::move(name)) {
        for (const auto& s : sets) add(s);
    }

    void add(const LexiconSet& set) {
        for (const auto& [term, category] : set.entries) {
            const auto c = category_index(category);
            if (term.back() == '*') {
                prefix_[term.substr(0, term.size() - 1)].push_back(c);
                max_prefix_ = std::max(max_prefix_, term.size() - 1);
            } else if (term.find(' ') != std::string::npos) {
                auto toks = tokenize(term);
                multi_[c].push_back(std::move(toks));
            } else {
                unigram_[term].push_back(c);
            }
        }
        for (auto& [c, seqs] : multi_)
            std::stable_sort(seqs.begin(), seqs.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
        for (const auto& w : set.warnings) warnings_.push_back(w);
    }

    const std::string& name() const { return name_; }
    const std::vector<std::string>& categories() const { return categories_; }
    bool has_category(std::string_view c) const {
        return std::find(categories_.begin(), categories_.end(), c) != categories_.end();
    }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Matches per category. Multiword entries of a category are matched
    /// greedily left to right (longest first) and consume their tokens for
    /// that category before single-token entries are tried.
    std::vector<std::size_t> count_matches(const std::vector<std::string>& tokens) const {
        std::vector<std::size_t> counts(categories_.size(), 0);
        std::vector<std::string> lower;
        lower.reserve(tokens.size());
        for (const auto& t : tokens) lower.push_back(detail::lower(t));

        std::vector<std::vector<unsigned>> single(lower.size());
        for (std::size_t i = 0; i < lower.size(); ++i) single[i] = categories_of(lower[i]);

        std::vector<char> uses_multi(categories_.size(), 0);
        for (const auto& [c, seqs] : multi_) uses_multi[c] = !seqs.empty();

        for (std::size_t i = 0; i < lower.size(); ++i)
            for (unsigned c : single[i])
                if (!uses_multi[c]) ++counts[c];

        for (const auto& [c, seqs] : multi_) {
            std::size_t i = 0;
            while (i < lower.size()) {
                std::size_t matched = 0;
                for (const auto& seq : seqs) {
                    if (seq.size() <= lower.size() - i && std::equal(seq.begin(), seq.end(), lower.begin() + i)) {
                        matched = seq.size();
                        break;
                    }
                }
                if (matched) {
                    ++counts[c];
                    i += matched;
                    continue;
                }
                if (std::find(single[i].begin(), single[i].end(), c) != single[i].end()) ++counts[c];
                ++i;
            }
        }
        return counts;
    }

    /// matches / token count for each requested category.
    template <typename Range>
    LexiconFeatureVector rates(const std::vector<std::string>& tokens, const Range& required) const {
        for (const auto& c : required)
            if (!has_category(c))
                throw Error(ErrorCode::MissingCategory, name_ + " lexicon lacks category " + std::string(c));
        LexiconFeatureVector v;
        for (const auto& c : categories_) v.rates[c] = 0.0;
        if (tokens.empty()) return v;
        const auto counts = count_matches(tokens);
        for (std::size_t c = 0; c < categories_.size(); ++c)
            v.rates[categories_[c]] = static_cast<double>(counts[c]) / static_cast<double>(tokens.size());
        return v;
    }

private:
    unsigned category_index(const std::string& c) {
        auto it = std::find(categories_.begin(), categories_.end(), c);
        if (it != categories_.end()) return static_cast<unsigned>(it - categories_.begin());
        categories_.push_back(c);
        return static_cast<unsigned>(categories_.size() - 1);
    }

    std::vector<unsigned> categories_of(const std::string& tok) const {
        std::vector<unsigned> out;
        if (auto it = unigram_.find(tok); it != unigram_.end()) out = it->second;
        if (!prefix_.empty()) {
            const std::size_t limit = std::min(max_prefix_, tok.size());
            for (std::size_t len = 1; len <= limit; ++len) {
                auto it = prefix_.find(tok.substr(0, len));
                if (it != prefix_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::string name_;
    std::vector<std::string> categories_;
    std::unordered_map<std::string, std::vector<unsigned>> unigram_;
    std::unordered_map<std::string, std::vector<unsigned>> prefix_;
    std::size_t max_prefix_ = 0;
    std::map<unsigned, std::vector<std::vector<std::string>>> multi_;
    std::vector<std::string> warnings_;
};

/// Loads every *.tsv file of a directory, in file-name order.
inline LexiconGroup load_lexicon_group(const std::filesystem::path& dir, std::string name) {
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::MissingAsset, "lexicon directory missing: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".tsv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    LexiconGroup g(std::move(name));
    for (const auto& f : files) g.add(load_lexicon(f));
    return g;
}

namespace detail {
inline const LexiconGroup& cached_group(const std::string& sub) {
    static std::mutex mu;
    static std::map<std::string, LexiconGroup> cache;
    std::lock_guard lock(mu);
    const auto dir = asset_dir() / "lexicons" / sub;
    const auto key = dir.string();
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, load_lexicon_group(dir, sub)).first;
    return it->second;
}
} // namespace detail

inline const LexiconGroup& bias_lexicons() { return detail::cached_group("bias"); }
inline const LexiconGroup& opinion_lexicons() { return detail::cached_group("opinion"); }
inline const LexiconGroup& moral_lexicons() { return detail::cached_group("moral"); }
inline const LexiconGroup& sentiment_lexicons() { return detail::cached_group("sentiment"); }

inline LexiconFeatureVector bias_features(const std::vector<std::string>& tokens, const LexiconGroup& lexicons) {
    return lexicons.rates(tokens, kBiasCategories);
}

inline LexiconFeatureVector opinion_features(const std::vector<std::string>& tokens, const LexiconGroup& lexicons) {
    return lexicons.rates(tokens, kOpinionCategories);
}

inline LexiconFeatureVector moral_features(const std::vector<std::string>& tokens, const LexiconGroup& lexicons) {
    return lexicons.rates(tokens, kMoralCategories);
}

inline LexiconFeatureVector sentiment_features(const std::vector<std::string>& tokens, const LexiconGroup& lexicons) {
    return lexicons.rates(tokens, kSentimentCategories);
}

} // namespace mgtd
