#pragma once

// Dataset ingestion (CSV / JSONL), the cleaning pipeline, stratified
// train/test/fold assignment and per-label corpus statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/asset_store.hpp"
#include "mgtd/csv.hpp"
#include "mgtd/error.hpp"
#include "mgtd/parallel.hpp"
#include "mgtd/rng.hpp"
#include "mgtd/textstats.hpp"
#include "mgtd/unicode.hpp"

namespace mgtd {

enum class Label : int { Human = 0, Machine = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

inline std::string_view to_string(Label l) { return l == Label::Human ? "human" : "machine"; }

struct Document {
    std::string id;
    std::string text;
    Label label = Label::Human;
    std::string source;

    bool operator==(const Document&) const = default;
};

enum class Format { CSV, JSONL };

inline Format format_from_path(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".csv" ? Format::CSV : Format::JSONL;
}

/// Column mapping for one input file. A text/label pair is the usual shape.
/// Files holding one class only use `constant_label`; files with a human
/// and a machine column side by side use `human_text_column` and
/// `machine_text_column`, producing two documents per row.
struct Schema {
    std::string id_column = "id";  // "synthesize" numbers rows instead
    std::string text_column = "text";
    std::string label_column = "label";
    std::optional<Label> constant_label;
    std::string human_text_column;
    std::string machine_text_column;
    std::string source_column;  // optional per-row source tag
    std::string source;         // fallback source tag
    std::string id_prefix;

    bool paired() const { return !human_text_column.empty() && !machine_text_column.empty(); }
};

struct IngestionReport {
    std::size_t rows_read = 0;
    std::size_t rows_dropped_missing = 0;
    std::size_t rows_dropped_nonenglish = 0;
    std::size_t rows_dropped_empty = 0;
    std::size_t rows_malformed = 0;
    std::size_t rows_unknown_label = 0;
    std::size_t rows_duplicate_id = 0;

    void merge(const IngestionReport& o) {
        rows_read += o.rows_read;
        rows_dropped_missing += o.rows_dropped_missing;
        rows_dropped_nonenglish += o.rows_dropped_nonenglish;
        rows_dropped_empty += o.rows_dropped_empty;
        rows_malformed += o.rows_malformed;
        rows_unknown_label += o.rows_unknown_label;
        rows_duplicate_id += o.rows_duplicate_id;
    }

    nlohmann::ordered_json to_json() const {
        return {{"rows_read", rows_read},
                {"rows_dropped_missing", rows_dropped_missing},
                {"rows_dropped_nonenglish", rows_dropped_nonenglish},
                {"rows_dropped_empty", rows_dropped_empty},
                {"rows_malformed", rows_malformed},
                {"rows_unknown_label", rows_unknown_label},
                {"rows_duplicate_id", rows_duplicate_id}};
    }

    bool operator==(const IngestionReport&) const = default;
};

enum class DatasetFamily { OpenAI, Wiki, Pubmed, Twitter };

inline std::optional<DatasetFamily> parse_family(std::string_view s) {
    if (s == "openai") return DatasetFamily::OpenAI;
    if (s == "wiki") return DatasetFamily::Wiki;
    if (s == "pubmed") return DatasetFamily::Pubmed;
    if (s == "twitter") return DatasetFamily::Twitter;
    return std::nullopt;
}

inline std::string_view to_string(DatasetFamily f) {
    switch (f) {
        case DatasetFamily::OpenAI: return "openai";
        case DatasetFamily::Wiki: return "wiki";
        case DatasetFamily::Pubmed: return "pubmed";
        case DatasetFamily::Twitter: return "twitter";
    }
    return "unknown";
}

struct CleaningConfig {
    bool remove_stopwords = false;
    bool drop_non_english = true;
    bool collapse_whitespace = true;
    bool strip_special_chars = true;
    bool drop_isolated_digits = true;
    std::string stopword_list_id = "stopwords_en";

    static CleaningConfig for_family(DatasetFamily f) {
        CleaningConfig c;
        c.remove_stopwords = f == DatasetFamily::Wiki || f == DatasetFamily::Pubmed;
        return c;
    }

    nlohmann::ordered_json to_json() const {
        return {{"remove_stopwords", remove_stopwords},
                {"drop_non_english", drop_non_english},
                {"collapse_whitespace", collapse_whitespace},
                {"strip_special_chars", strip_special_chars},
                {"drop_isolated_digits", drop_isolated_digits},
                {"stopword_list_id", stopword_list_id}};
    }

    bool operator==(const CleaningConfig&) const = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::vector<std::string> provenance;  // input paths
    std::optional<CleaningConfig> cleaning;
    IngestionReport report;

    std::size_t size() const { return documents.size(); }
    std::size_t count(Label l) const {
        return static_cast<std::size_t>(
            std::count_if(documents.begin(), documents.end(), [&](const Document& d) { return d.label == l; }));
    }
};

// ---------------------------------------------------------------- ingestion

namespace detail {

inline std::optional<Label> parse_label_string(std::string s) {
    s = trim(s);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "0" || s == "human") return Label::Human;
    if (s == "1" || s == "machine") return Label::Machine;
    return std::nullopt;
}

inline std::optional<Label> parse_label_json(const nlohmann::json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) {
        const auto n = v.get<std::int64_t>();
        if (n == 0) return Label::Human;
        if (n == 1) return Label::Machine;
        return std::nullopt;
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == 0.0) return Label::Human;
        if (d == 1.0) return Label::Machine;
        return std::nullopt;
    }
    if (v.is_boolean()) return v.get<bool>() ? Label::Machine : Label::Human;
    if (v.is_string()) return parse_label_string(v.get<std::string>());
    return std::nullopt;
}

inline std::optional<std::string> json_field_string(const nlohmann::json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
    return it->dump();
}

// One ingested row, independent of the file format.
struct RawRow {
    std::function<std::optional<std::string>(const std::string&)> get;
    std::function<std::optional<Label>(const std::string&)> label;
};

class CorpusBuilder {
public:
    CorpusBuilder(const Schema& schema, Corpus& corpus) : schema_(schema), corpus_(corpus) {}

    void add_row(const RawRow& row) {
        ++corpus_.report.rows_read;
        ++row_index_;
        std::string base_id;
        if (schema_.id_column == "synthesize") {
            base_id = std::to_string(row_index_);
        } else {
            auto id = row.get(schema_.id_column);
            if (!id || trim(*id).empty()) {
                ++corpus_.report.rows_dropped_missing;
                return;
            }
            base_id = trim(*id);
        }
        std::string source = schema_.source;
        if (!schema_.source_column.empty()) {
            if (auto s = row.get(schema_.source_column); s && !s->empty()) source = *s;
        }

        if (schema_.paired()) {
            auto h = row.get(schema_.human_text_column);
            auto m = row.get(schema_.machine_text_column);
            if (!h || !m || trim(*h).empty() || trim(*m).empty()) {
                ++corpus_.report.rows_dropped_missing;
                return;
            }
            emit(base_id + "-h", std::move(*h), Label::Human, source);
            emit(base_id + "-m", std::move(*m), Label::Machine, source);
            return;
        }

        auto text = row.get(schema_.text_column);
        if (!text || trim(*text).empty()) {
            ++corpus_.report.rows_dropped_missing;
            return;
        }
        Label label;
        if (schema_.constant_label) {
            label = *schema_.constant_label;
        } else {
            if (!row.get(schema_.label_column)) {
                ++corpus_.report.rows_dropped_missing;
                return;
            }
            auto l = row.label(schema_.label_column);
            if (!l) {
                ++corpus_.report.rows_unknown_label;
                return;
            }
            label = *l;
        }
        emit(base_id, std::move(*text), label, source);
    }

private:
    void emit(std::string id, std::string text, Label label, const std::string& source) {
        id = schema_.id_prefix + id;
        if (!seen_.insert(id).second) {
            ++corpus_.report.rows_duplicate_id;
            return;
        }
        corpus_.documents.push_back({std::move(id), std::move(text), label, source});
    }

    const Schema& schema_;
    Corpus& corpus_;
    std::size_t row_index_ = 0;
    std::unordered_set<std::string> seen_;
};

} // namespace detail

/// Loads one file. Bad rows are skipped and counted in `Corpus::report`.
inline Corpus load_corpus(const std::filesystem::path& path, Format format, const Schema& schema) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + path.string());

    Corpus corpus;
    corpus.provenance.push_back(path.string());
    detail::CorpusBuilder builder(schema, corpus);

    if (format == Format::JSONL) {
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (first) {
                if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
                first = false;
            }
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception&) {
                ++corpus.report.rows_read;
                ++corpus.report.rows_malformed;
                continue;
            }
            if (!obj.is_object()) {
                ++corpus.report.rows_read;
                ++corpus.report.rows_malformed;
                continue;
            }
            detail::RawRow row{
                [&](const std::string& k) { return detail::json_field_string(obj, k); },
                [&](const std::string& k) -> std::optional<Label> {
                    auto it = obj.find(k);
                    if (it == obj.end()) return std::nullopt;
                    return detail::parse_label_json(*it);
                }};
            builder.add_row(row);
        }
        return corpus;
    }

    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) return corpus;
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;

    std::vector<std::string> fields;
    for (;;) {
        bool got = false;
        try {
            got = reader.next(fields);
        } catch (const Error&) {
            ++corpus.report.rows_read;
            ++corpus.report.rows_malformed;
            break;
        }
        if (!got) break;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != header.size()) {
            ++corpus.report.rows_read;
            ++corpus.report.rows_malformed;
            continue;
        }
        auto get = [&](const std::string& k) -> std::optional<std::string> {
            auto it = col.find(k);
            if (it == col.end()) return std::nullopt;
            const auto& v = fields[it->second];
            if (v.empty()) return std::nullopt;
            return v;
        };
        detail::RawRow row{get, [&](const std::string& k) -> std::optional<Label> {
                               auto v = get(k);
                               if (!v) return std::nullopt;
                               return detail::parse_label_string(*v);
                           }};
        builder.add_row(row);
    }
    return corpus;
}

/// Concatenates corpora; later duplicates of an id are dropped and counted.
inline Corpus merge_corpora(std::vector<Corpus> parts) {
    Corpus out;
    std::unordered_set<std::string> seen;
    for (auto& p : parts) {
        out.report.merge(p.report);
        out.provenance.insert(out.provenance.end(), p.provenance.begin(), p.provenance.end());
        for (auto& d : p.documents) {
            if (!seen.insert(d.id).second) {
                ++out.report.rows_duplicate_id;
                continue;
            }
            out.documents.push_back(std::move(d));
        }
        if (p.cleaning) out.cleaning = p.cleaning;
    }
    return out;
}

/// Keeps `total / 2` documents of each class, drawn without replacement and
/// left in their original order.
inline Corpus balanced_subsample(const Corpus& corpus, std::size_t total, std::uint64_t seed) {
    const std::size_t per_class = total / 2;
    std::vector<std::size_t> idx[2];
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) idx[to_int(corpus.documents[i].label)].push_back(i);
    Engine eng(derive_seed(seed, "subsample"));
    std::vector<std::size_t> keep;
    for (auto& v : idx) {
        if (v.size() < per_class)
            throw Error(ErrorCode::TooFewDocuments, "subsample wants " + std::to_string(per_class) +
                                                        " documents per class, found " + std::to_string(v.size()));
        shuffle(std::span<std::size_t>(v), eng);
        keep.insert(keep.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    std::sort(keep.begin(), keep.end());
    Corpus out;
    out.provenance = corpus.provenance;
    out.cleaning = corpus.cleaning;
    out.report = corpus.report;
    for (auto i : keep) out.documents.push_back(corpus.documents[i]);
    return out;
}

/// Canonical corpus file: one {"id","text","label","source"} object per line.
inline void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& d : corpus.documents) {
        nlohmann::ordered_json j{{"id", d.id}, {"text", d.text}, {"label", to_int(d.label)}, {"source", d.source}};
        out << j.dump() << '\n';
    }
}

inline Corpus read_corpus_jsonl(const std::filesystem::path& path) {
    Schema s;
    s.source_column = "source";
    return load_corpus(path, Format::JSONL, s);
}

// ----------------------------------------------------------------- cleaning

namespace detail {

inline bool is_kept_punct(unicode::CodePoint c) {
    return c == '.' || c == ',' || c == '!' || c == '?' || c == '\'' || c == '-';
}

// NFC, lowercase, character filter and run/whitespace collapsing.
inline std::string normalize_chars(std::string_view raw) {
    const std::string lowered = unicode::nfc(unicode::to_lower(unicode::nfc(raw)));
    std::string out;
    out.reserve(lowered.size());
    unicode::CodePoint prev = ' ';
    unicode::for_each_code_point(lowered, [&](unicode::CodePoint c, std::size_t, std::size_t) {
        if (c == 0x2019 || c == 0x2018) c = '\'';
        if (u_getCombiningClass(c) != 0 || (U_GET_GC_MASK(c) & U_GC_M_MASK)) return;
        if (!unicode::is_alnum(c) && !is_kept_punct(c)) c = ' ';
        if (c == ' ' && prev == ' ') return;
        if (is_kept_punct(c) && c == prev) return;
        unicode::append_utf8(out, c);
        prev = c;
    });
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

inline bool is_single_digit_token(std::string_view tok) {
    std::size_t n = 0;
    bool digit = false;
    unicode::for_each_code_point(tok, [&](unicode::CodePoint c, std::size_t, std::size_t) {
        ++n;
        digit = unicode::is_digit(c);
    });
    return n == 1 && digit;
}

} // namespace detail

/// Applies the cleaning pipeline to one text. Idempotent.
inline std::string clean_text(std::string_view raw, const CleaningConfig& cfg, const WordSet& stopwords) {
    const std::string norm = detail::normalize_chars(raw);
    std::string out;
    out.reserve(norm.size());
    std::size_t pos = 0;
    while (pos < norm.size()) {
        auto sp = norm.find(' ', pos);
        if (sp == std::string::npos) sp = norm.size();
        const std::string_view tok(norm.data() + pos, sp - pos);
        pos = sp + 1;
        if (tok.empty()) continue;
        if (cfg.drop_isolated_digits && detail::is_single_digit_token(tok)) continue;
        if (cfg.remove_stopwords) {
            const auto core = detail::strip_edges(tok);
            if (!core.empty() && stopwords.contains(std::string(core))) continue;
        }
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

inline std::string clean_text(std::string_view raw, const CleaningConfig& cfg) {
    return clean_text(raw, cfg, stopwords_en());
}

/// At least 90% of alphabetic characters are ASCII a-z. Texts with no
/// letters fail.
inline bool looks_english(std::string_view text) {
    std::size_t letters = 0, ascii = 0;
    unicode::for_each_code_point(text, [&](unicode::CodePoint c, std::size_t, std::size_t) {
        if (!unicode::is_letter(c)) return;
        ++letters;
        if (unicode::is_ascii_lower(c) || (c >= 'A' && c <= 'Z')) ++ascii;
    });
    return letters > 0 && static_cast<double>(ascii) >= 0.9 * static_cast<double>(letters);
}

inline Corpus clean(const Corpus& corpus, const CleaningConfig& cfg) {
    static const WordSet kNone;
    const WordSet& stop = cfg.remove_stopwords ? stopwords_en() : kNone;
    std::vector<std::string> cleaned(corpus.documents.size());
    parallel_for(corpus.documents.size(),
                 [&](std::size_t i) { cleaned[i] = clean_text(corpus.documents[i].text, cfg, stop); });

    Corpus out;
    out.provenance = corpus.provenance;
    out.cleaning = cfg;
    out.report = corpus.report;
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
        if (cleaned[i].empty()) {
            ++out.report.rows_dropped_empty;
            continue;
        }
        if (cfg.drop_non_english && !looks_english(cleaned[i])) {
            ++out.report.rows_dropped_nonenglish;
            continue;
        }
        Document d = corpus.documents[i];
        d.text = std::move(cleaned[i]);
        out.documents.push_back(std::move(d));
    }
    return out;
}

// ------------------------------------------------------------------ splits

struct SplitPlan {
    static constexpr int kTest = 0;

    double test_fraction = 0.10;
    int n_folds = 5;
    std::uint64_t seed = 42;
    std::map<std::string, int> assignments;  // id -> kTest or fold 1..n_folds

    std::vector<std::string> ids_in(int partition) const {
        std::vector<std::string> ids;
        for (const auto& [id, p] : assignments)
            if (p == partition) ids.push_back(id);
        return ids;
    }
    std::vector<std::string> train_pool_ids() const {
        std::vector<std::string> ids;
        for (const auto& [id, p] : assignments)
            if (p != kTest) ids.push_back(id);
        return ids;
    }

    bool operator==(const SplitPlan&) const = default;
};

/// Stratified assignment. Each class is ordered by id, shuffled with the
/// seed, then the classes are interleaved so that every contiguous run of
/// the combined order holds floor-consistent class counts. The test set is
/// the leading run and the folds are the following contiguous blocks.
inline SplitPlan make_split(const Corpus& corpus, double test_fraction, int n_folds, std::uint64_t seed) {
    if (n_folds < 1) throw Error(ErrorCode::InvalidArgument, "n_folds must be positive");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "test_fraction must be in [0, 1)");

    std::vector<std::string> by_class[2];
    for (const auto& d : corpus.documents) by_class[to_int(d.label)].push_back(d.id);
    for (auto& ids : by_class) {
        if (ids.size() < static_cast<std::size_t>(n_folds))
            throw Error(ErrorCode::TooFewDocuments,
                        "each class needs at least " + std::to_string(n_folds) + " documents");
        std::sort(ids.begin(), ids.end());
    }
    Engine eng(derive_seed(seed, "split"));
    for (auto& ids : by_class) shuffle(std::span<std::string>(ids), eng);

    const std::size_t n = by_class[0].size() + by_class[1].size();
    const std::size_t n1 = by_class[1].size();
    std::vector<const std::string*> order;
    order.reserve(n);
    std::size_t next[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const bool machine = (i + 1) * n1 / n > i * n1 / n;
        const int c = machine ? 1 : 0;
        order.push_back(&by_class[c][next[c]++]);
    }

    SplitPlan plan;
    plan.test_fraction = test_fraction;
    plan.n_folds = n_folds;
    plan.seed = seed;
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    const std::size_t pool = n - n_test;
    if (pool < static_cast<std::size_t>(n_folds)) throw Error(ErrorCode::TooFewDocuments, "training pool too small");
    for (std::size_t i = 0; i < n_test; ++i) plan.assignments[*order[i]] = SplitPlan::kTest;
    for (std::size_t j = 0; j < pool; ++j) {
        const int fold = static_cast<int>(j * static_cast<std::size_t>(n_folds) / pool) + 1;
        plan.assignments[*order[n_test + j]] = fold;
    }
    return plan;
}

// ------------------------------------------------------------------- stats

struct LabelStats {
    double mean_tokens = 0.0;
    double sd_tokens = 0.0;
    std::size_t vocab = 0;
    std::size_t n = 0;
};

struct CorpusStats {
    std::map<Label, LabelStats> per_label;
    std::size_t vocab_union = 0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        for (const auto& [label, s] : per_label)
            j[std::string(to_string(label))] = {
                {"n", s.n}, {"mean_tokens", s.mean_tokens}, {"sd_tokens", s.sd_tokens}, {"vocab", s.vocab}};
        j["vocab_union"] = vocab_union;
        return j;
    }
};

/// Token-count mean and population SD, plus distinct-token vocabulary, per label.
inline CorpusStats corpus_stats(const Corpus& corpus) {
    if (corpus.documents.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no documents");
    std::map<Label, std::vector<double>> lengths;
    std::map<Label, std::unordered_set<std::string>> vocab;
    std::unordered_set<std::string> all;
    for (const auto& d : corpus.documents) {
        auto toks = tokenize(d.text);
        lengths[d.label].push_back(static_cast<double>(toks.size()));
        for (auto& t : toks) {
            all.insert(t);
            vocab[d.label].insert(std::move(t));
        }
    }
    CorpusStats out;
    out.vocab_union = all.size();
    for (const auto& [label, xs] : lengths) {
        LabelStats s;
        s.n = xs.size();
        double sum = 0.0;
        for (double x : xs) sum += x;
        s.mean_tokens = sum / static_cast<double>(s.n);
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean_tokens) * (x - s.mean_tokens);
        s.sd_tokens = std::sqrt(ss / static_cast<double>(s.n));
        s.vocab = vocab[label].size();
        out.per_label[label] = s;
    }
    return out;
}

} // namespace mgtd
