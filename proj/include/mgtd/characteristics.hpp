#pragma once

// Human vs machine comparison of readability, bias, morality and sentiment
// features with Welch t-tests.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/corpus.hpp"
#include "mgtd/csv.hpp"
#include "mgtd/eval.hpp"
#include "mgtd/lexicon.hpp"
#include "mgtd/parallel.hpp"
#include "mgtd/readability.hpp"
#include "mgtd/stats.hpp"
#include "mgtd/textstats.hpp"

namespace mgtd {

enum class FeatureFamily { Readability, Bias, Moral, Sentiment };

inline constexpr FeatureFamily kAllFeatureFamilies[] = {FeatureFamily::Readability, FeatureFamily::Bias,
                                                        FeatureFamily::Moral, FeatureFamily::Sentiment};

inline std::string_view to_string(FeatureFamily f) {
    switch (f) {
        case FeatureFamily::Readability: return "readability";
        case FeatureFamily::Bias: return "bias";
        case FeatureFamily::Moral: return "moral";
        case FeatureFamily::Sentiment: return "sentiment";
    }
    return "unknown";
}

inline std::optional<FeatureFamily> parse_feature_family(std::string_view s) {
    for (auto f : kAllFeatureFamilies)
        if (to_string(f) == s) return f;
    return std::nullopt;
}

struct GroupSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample (n - 1) SD; 0 when n < 2
    std::size_t n = 0;
};

struct CharacteristicRow {
    FeatureFamily family = FeatureFamily::Readability;
    std::string metric;
    GroupSummary human;
    GroupSummary machine;
    std::optional<TTestResult> ttest;  // absent when a group has fewer than two values
};

struct CharacteristicReport {
    std::string dataset;
    std::vector<CharacteristicRow> rows;
    std::map<FeatureFamily, std::size_t> skipped;  // documents with no computable value
};

namespace detail {

struct FamilyValues {
    std::vector<std::string> metrics;
    // per document: nullopt when the family is undefined for it
    std::vector<std::optional<std::vector<double>>> values;
};

inline const std::vector<std::string>& readability_metric_names() {
    static const std::vector<std::string> names = {"Gunning Fog Index", "SMOG Index", "Dale-Chall Readability",
                                                   "Flesch Reading Ease Score", "Coleman Liau Index"};
    return names;
}

inline std::vector<std::string> category_names(std::span<const std::string_view> cats) {
    return {cats.begin(), cats.end()};
}

inline FamilyValues family_values(const Corpus& corpus, FeatureFamily family) {
    FamilyValues fv;
    const auto n = corpus.documents.size();
    fv.values.resize(n);
    switch (family) {
        case FeatureFamily::Readability: {
            fv.metrics = readability_metric_names();
            const auto& fam = dale_chall_familiar_words();
            const auto& abbrev = abbreviations_en();
            parallel_for(n, [&](std::size_t i) {
                const auto c = text_counts(corpus.documents[i].text, fam, abbrev);
                if (c.words == 0 || c.sentences == 0) return;
                const auto s = readability(c);
                fv.values[i] = std::vector<double>{s.gunning_fog, s.smog, s.dale_chall, s.flesch_reading_ease,
                                                   s.coleman_liau};
            });
            break;
        }
        case FeatureFamily::Bias: {
            fv.metrics = category_names(kBiasCategories);
            for (auto c : kOpinionCategories) fv.metrics.emplace_back(c);
            const auto& bias = bias_lexicons();
            const auto& opinion = opinion_lexicons();
            parallel_for(n, [&](std::size_t i) {
                const auto toks = tokenize(corpus.documents[i].text);
                if (toks.empty()) return;
                const auto b = bias_features(toks, bias);
                const auto o = opinion_features(toks, opinion);
                std::vector<double> v;
                for (auto c : kBiasCategories) v.push_back(b[std::string(c)]);
                for (auto c : kOpinionCategories) v.push_back(o[std::string(c)]);
                fv.values[i] = std::move(v);
            });
            break;
        }
        case FeatureFamily::Moral: {
            fv.metrics = category_names(kMoralCategories);
            const auto& lex = moral_lexicons();
            parallel_for(n, [&](std::size_t i) {
                const auto toks = tokenize(corpus.documents[i].text);
                if (toks.empty()) return;
                const auto f = moral_features(toks, lex);
                std::vector<double> v;
                for (auto c : kMoralCategories) v.push_back(f[std::string(c)]);
                fv.values[i] = std::move(v);
            });
            break;
        }
        case FeatureFamily::Sentiment: {
            fv.metrics = category_names(kSentimentCategories);
            const auto& lex = sentiment_lexicons();
            parallel_for(n, [&](std::size_t i) {
                const auto toks = tokenize(corpus.documents[i].text);
                if (toks.empty()) return;
                const auto f = sentiment_features(toks, lex);
                std::vector<double> v;
                for (auto c : kSentimentCategories) v.push_back(f[std::string(c)]);
                fv.values[i] = std::move(v);
            });
            break;
        }
    }
    return fv;
}

inline GroupSummary summarize(const std::vector<double>& x) {
    GroupSummary g;
    g.n = x.size();
    if (!x.empty()) g.mean = mean(x);
    if (x.size() >= 2) g.sd = sample_sd(x);
    return g;
}

} // namespace detail

/// Per-metric group means, sample SDs and Welch tests between the human and
/// machine documents. Documents where a family is undefined (no words or no
/// sentences) are left out of that family and counted in `skipped`.
inline CharacteristicReport characteristic_report(const Corpus& corpus, const std::vector<FeatureFamily>& families,
                                                  const std::string& dataset = "dataset") {
    if (corpus.count(Label::Human) == 0 || corpus.count(Label::Machine) == 0)
        throw Error(ErrorCode::SingleClassCorpus, "characteristic report needs both human and machine documents");
    CharacteristicReport rep;
    rep.dataset = dataset;
    for (auto family : families) {
        const auto fv = detail::family_values(corpus, family);
        std::size_t skipped = 0;
        for (std::size_t m = 0; m < fv.metrics.size(); ++m) {
            std::vector<double> groups[2];
            for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
                if (!fv.values[i]) {
                    if (m == 0) ++skipped;
                    continue;
                }
                groups[to_int(corpus.documents[i].label)].push_back((*fv.values[i])[m]);
            }
            CharacteristicRow row;
            row.family = family;
            row.metric = fv.metrics[m];
            row.human = detail::summarize(groups[0]);
            row.machine = detail::summarize(groups[1]);
            if (groups[0].size() >= 2 && groups[1].size() >= 2) row.ttest = welch_ttest(groups[0], groups[1]);
            rep.rows.push_back(std::move(row));
        }
        rep.skipped[family] = skipped;
    }
    return rep;
}

inline std::string characteristics_csv(const CharacteristicReport& rep) {
    std::ostringstream out;
    csv::write_row(out, {"dataset", "family", "metric", "human_mean", "human_sd", "human_n", "machine_mean",
                         "machine_sd", "machine_n", "t", "dof", "p", "significant_at_005"});
    for (const auto& r : rep.rows) {
        std::vector<std::string> row{rep.dataset,
                                     std::string(to_string(r.family)),
                                     r.metric,
                                     detail::fixed(r.human.mean),
                                     detail::fixed(r.human.sd),
                                     std::to_string(r.human.n),
                                     detail::fixed(r.machine.mean),
                                     detail::fixed(r.machine.sd),
                                     std::to_string(r.machine.n)};
        if (r.ttest) {
            row.push_back(detail::fixed(r.ttest->t_statistic));
            row.push_back(detail::fixed(r.ttest->dof));
            row.push_back(detail::general(r.ttest->p_value));
            row.push_back(r.ttest->significant_at_005 ? "true" : "false");
        } else {
            row.insert(row.end(), {"", "", "", ""});
        }
        csv::write_row(out, row);
    }
    return out.str();
}

/// One means table and one SD table per family. Readability values use two
/// decimals, lexicon rates four.
inline std::string characteristics_markdown(const CharacteristicReport& rep) {
    std::ostringstream out;
    std::vector<FeatureFamily> order;
    for (const auto& r : rep.rows)
        if (order.empty() || order.back() != r.family) order.push_back(r.family);
    for (auto family : order) {
        const int digits = family == FeatureFamily::Readability ? 2 : 4;
        out << "## " << rep.dataset << ": " << to_string(family) << " (mean)\n\n";
        out << "| Metric | Human | Machine | t | p | Significant |\n|---|---|---|---|---|---|\n";
        for (const auto& r : rep.rows) {
            if (r.family != family) continue;
            out << "| " << r.metric << " | " << detail::fixed(r.human.mean, digits) << " | "
                << detail::fixed(r.machine.mean, digits) << " | ";
            if (r.ttest)
                out << detail::fixed(r.ttest->t_statistic, 2) << " | " << detail::general(r.ttest->p_value, 4) << " | "
                    << (r.ttest->significant_at_005 ? "yes" : "no") << " |\n";
            else
                out << "n/a | n/a | n/a |\n";
        }
        out << "\n## " << rep.dataset << ": " << to_string(family) << " (SD)\n\n";
        out << "| Metric | Human | Machine |\n|---|---|---|\n";
        for (const auto& r : rep.rows)
            if (r.family == family)
                out << "| " << r.metric << " | " << detail::fixed(r.human.sd, digits) << " | "
                    << detail::fixed(r.machine.sd, digits) << " |\n";
        const auto it = rep.skipped.find(family);
        if (it != rep.skipped.end() && it->second > 0)
            out << "\nDocuments without a value: " << it->second << "\n";
        out << "\n";
    }
    return out.str();
}

inline void write_characteristic_reports(const CharacteristicReport& rep, const std::filesystem::path& dir) {
    write_text_file(dir / "characteristics.csv", characteristics_csv(rep));
    write_text_file(dir / "characteristics.md", characteristics_markdown(rep));
}

} // namespace mgtd
