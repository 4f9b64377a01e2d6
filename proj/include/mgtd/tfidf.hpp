#pragma once

// TF-IDF vectorizer with smoothed idf: ln((1 + N) / (1 + df)) + 1.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/corpus.hpp"
#include "mgtd/error.hpp"
#include "mgtd/parallel.hpp"
#include "mgtd/sparse.hpp"
#include "mgtd/textstats.hpp"

namespace mgtd {

enum class Norm { L2, None };

struct TfidfConfig {
    std::size_t min_df = 1;
    std::optional<std::size_t> max_features = 50000;
    bool sublinear_tf = false;
    Norm norm = Norm::L2;
    int ngram_max = 1;  // 1 = unigrams, 2 = unigrams + bigrams

    nlohmann::json to_json() const {
        return {{"min_df", min_df},
                {"max_features", max_features ? nlohmann::json(*max_features) : nlohmann::json(nullptr)},
                {"sublinear_tf", sublinear_tf},
                {"norm", norm == Norm::L2 ? "l2" : "none"},
                {"ngram_max", ngram_max}};
    }

    static TfidfConfig from_json(const nlohmann::json& j) {
        TfidfConfig c;
        c.min_df = j.at("min_df").get<std::size_t>();
        if (!j.at("max_features").is_null()) c.max_features = j.at("max_features").get<std::size_t>();
        else c.max_features.reset();
        c.sublinear_tf = j.at("sublinear_tf").get<bool>();
        c.norm = j.at("norm").get<std::string>() == "l2" ? Norm::L2 : Norm::None;
        c.ngram_max = j.at("ngram_max").get<int>();
        return c;
    }
};

/// Lowercased tokens, plus space-joined bigrams when ngram_max >= 2.
inline std::vector<std::string> extract_terms(std::string_view text, int ngram_max = 1) {
    auto toks = tokenize(text);
    for (auto& t : toks) t = detail::lower(t);
    if (ngram_max >= 2 && toks.size() >= 2) {
        const std::size_t n = toks.size();
        for (std::size_t i = 0; i + 1 < n; ++i) toks.push_back(toks[i] + " " + toks[i + 1]);
    }
    return toks;
}

class TfidfModel {
public:
    TfidfModel() = default;

    const TfidfConfig& config() const { return config_; }
    std::size_t dim() const { return terms_.size(); }
    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<double>& idf() const { return idf_; }
    std::size_t n_documents() const { return n_docs_; }

    std::optional<std::uint32_t> index_of(const std::string& term) const {
        auto it = index_.find(term);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    double idf_of(const std::string& term) const {
        auto i = index_of(term);
        return i ? idf_[*i] : 0.0;
    }

    /// Raw in-vocabulary term counts.
    SparseVector counts(std::string_view text) const {
        std::map<std::uint32_t, double> c;
        for (const auto& t : extract_terms(text, config_.ngram_max))
            if (auto it = index_.find(t); it != index_.end()) c[it->second] += 1.0;
        SparseVector v;
        v.indices.reserve(c.size());
        v.values.reserve(c.size());
        for (const auto& [i, n] : c) {
            v.indices.push_back(i);
            v.values.push_back(n);
        }
        return v;
    }

    SparseVector transform(std::string_view text) const {
        SparseVector v = counts(text);
        for (std::size_t k = 0; k < v.indices.size(); ++k) {
            const double tf = config_.sublinear_tf ? 1.0 + std::log(v.values[k]) : v.values[k];
            v.values[k] = tf * idf_[v.indices[k]];
        }
        if (config_.norm == Norm::L2) {
            const double n = v.norm2();
            if (n > 0.0)
                for (double& x : v.values) x /= n;
        }
        return v;
    }

    SparseVector transform(const Document& d) const { return transform(d.text); }

    std::vector<SparseVector> transform_all(const std::vector<const Document*>& docs, bool raw_counts = false) const {
        std::vector<SparseVector> out(docs.size());
        parallel_for(docs.size(), [&](std::size_t i) {
            out[i] = raw_counts ? counts(docs[i]->text) : transform(docs[i]->text);
        });
        return out;
    }

    nlohmann::json to_json() const {
        return {{"config", config_.to_json()}, {"n_documents", n_docs_}, {"terms", terms_}, {"idf", idf_}};
    }

    static TfidfModel from_json(const nlohmann::json& j) {
        TfidfModel m;
        m.config_ = TfidfConfig::from_json(j.at("config"));
        m.n_docs_ = j.at("n_documents").get<std::size_t>();
        m.terms_ = j.at("terms").get<std::vector<std::string>>();
        m.idf_ = j.at("idf").get<std::vector<double>>();
        if (m.terms_.size() != m.idf_.size()) throw Error(ErrorCode::DimensionMismatch, "tfidf terms/idf length differ");
        m.rebuild_index();
        return m;
    }

    friend TfidfModel fit_tfidf(const std::vector<const Document*>& train_docs, const TfidfConfig& config);

private:
    void rebuild_index() {
        index_.clear();
        index_.reserve(terms_.size());
        for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    }

    TfidfConfig config_;
    std::size_t n_docs_ = 0;
    std::vector<std::string> terms_;  // column order (lexicographic)
    std::vector<double> idf_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Fits on the given (training) documents only.
inline TfidfModel fit_tfidf(const std::vector<const Document*>& train_docs, const TfidfConfig& config) {
    if (train_docs.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training documents");
    struct Stat {
        std::size_t df = 0;
        std::size_t total = 0;
    };
    std::vector<std::vector<std::string>> per_doc(train_docs.size());
    parallel_for(train_docs.size(), [&](std::size_t i) { per_doc[i] = extract_terms(train_docs[i]->text, config.ngram_max); });

    std::unordered_map<std::string, Stat> stats;
    bool any = false;
    for (auto& terms : per_doc) {
        if (!terms.empty()) any = true;
        std::sort(terms.begin(), terms.end());
        for (std::size_t k = 0; k < terms.size(); ++k) {
            auto& s = stats[terms[k]];
            ++s.total;
            if (k == 0 || terms[k] != terms[k - 1]) ++s.df;
        }
        terms.clear();
        terms.shrink_to_fit();
    }
    if (!any) throw Error(ErrorCode::EmptyTrainingSet, "training documents contain no terms");

    std::vector<std::pair<std::string, Stat>> kept;
    for (auto& [t, s] : stats)
        if (s.df >= config.min_df) kept.emplace_back(t, s);
    if (config.max_features && kept.size() > *config.max_features) {
        std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            if (a.second.total != b.second.total) return a.second.total > b.second.total;
            return a.first < b.first;
        });
        kept.resize(*config.max_features);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    TfidfModel m;
    m.config_ = config;
    m.n_docs_ = train_docs.size();
    const double n = static_cast<double>(train_docs.size());
    for (auto& [t, s] : kept) {
        m.terms_.push_back(t);
        m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(s.df))) + 1.0);
    }
    m.rebuild_index();
    return m;
}

inline TfidfModel fit_tfidf(const std::vector<Document>& train_docs, const TfidfConfig& config) {
    std::vector<const Document*> ptrs;
    ptrs.reserve(train_docs.size());
    for (const auto& d : train_docs) ptrs.push_back(&d);
    return fit_tfidf(ptrs, config);
}

inline SparseVector transform(const TfidfModel& model, const Document& doc) { return model.transform(doc); }

} // namespace mgtd
