#pragma once

// Rephrase-attack generation through a chat-completion endpoint, the
// vocabulary-overlap constraint, and before/after robustness evaluation.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/corpus.hpp"
#include "mgtd/eval.hpp"
#include "mgtd/http.hpp"
#include "mgtd/parallel.hpp"
#include "mgtd/sha256.hpp"
#include "mgtd/tfidf.hpp"

namespace mgtd {

// ---------------------------------------------------------------- prompts

enum class PromptTemplate { TweetGeneric, TweetMimic, AbstractFromTitle };

inline std::string_view to_string(PromptTemplate t) {
    switch (t) {
        case PromptTemplate::TweetGeneric: return "tweet_generic";
        case PromptTemplate::TweetMimic: return "tweet_mimic";
        case PromptTemplate::AbstractFromTitle: return "abstract_from_title";
    }
    return "unknown";
}

inline std::optional<PromptTemplate> parse_prompt_template(std::string_view s) {
    for (auto t : {PromptTemplate::TweetGeneric, PromptTemplate::TweetMimic, PromptTemplate::AbstractFromTitle})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

struct RephraseRequest {
    std::string human_text;
    std::string style_directives = "style, tone, and vocabulary usage";
    double overlap_threshold = 0.6;
    int max_attempts = 5;
    std::optional<std::size_t> char_limit;
    std::string title;  // abstract_from_title
    std::string topic;  // tweet_generic
};

inline std::string_view template_text(PromptTemplate t) {
    switch (t) {
        case PromptTemplate::TweetGeneric:
            return "Write one tweet about {topic}. Do not exceed {char_limit} characters. Do not include line "
                   "breaks within the tweet.";
        case PromptTemplate::TweetMimic:
            return "Write a new tweet that mimics the {style_directives} of the tweet below. Use at least "
                   "{overlap_percent}% of the vocabulary from the original tweet. Do not exceed {char_limit} "
                   "characters. Do not include line breaks within the tweet.\n\nText:\n{human_text}";
        case PromptTemplate::AbstractFromTitle:
            return "Write a scientific abstract for a paper titled: {title}";
    }
    return "";
}

/// Substitutes {name} placeholders; any placeholder without a value throws
/// MissingPlaceholder.
inline std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const auto open = tmpl.find('{', i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        const auto close = tmpl.find('}', open);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        const std::string name(tmpl.substr(open + 1, close - open - 1));
        auto it = values.find(name);
        if (it == values.end()) throw Error(ErrorCode::MissingPlaceholder, "no value for placeholder {" + name + "}");
        out += it->second;
        i = close + 1;
    }
    return out;
}

inline std::string build_prompt(const RephraseRequest& req, PromptTemplate t) {
    if (req.overlap_threshold < 0.0 || req.overlap_threshold > 1.0)
        throw Error(ErrorCode::InvalidArgument, "overlap threshold must be in [0, 1]");
    std::map<std::string, std::string> v;
    if (req.char_limit) v["char_limit"] = std::to_string(*req.char_limit);
    if (!req.human_text.empty()) v["human_text"] = req.human_text;
    if (!req.title.empty()) v["title"] = req.title;
    if (!req.topic.empty()) v["topic"] = req.topic;
    v["style_directives"] = req.style_directives;
    v["overlap_percent"] = std::to_string(static_cast<int>(std::lround(req.overlap_threshold * 100.0)));
    return fill_template(template_text(t), v);
}

// ---------------------------------------------------------------- overlap

enum class OverlapDenominator { Human, Candidate };

inline std::unordered_set<std::string> token_types(std::string_view text) {
    const auto terms = extract_terms(text, 1);
    return {terms.begin(), terms.end()};
}

/// |V(candidate) ∩ V(human)| / |V(denominator)| over lowercased token types,
/// stopwords included.
inline double overlap_ratio(std::string_view human_text, std::string_view candidate_text,
                            OverlapDenominator denom = OverlapDenominator::Human) {
    const auto h = token_types(human_text);
    const auto c = token_types(candidate_text);
    if (h.empty() || c.empty()) throw Error(ErrorCode::EmptyText, "overlap needs non-empty texts");
    std::size_t shared = 0;
    for (const auto& t : c) shared += h.count(t);
    const auto base = denom == OverlapDenominator::Human ? h.size() : c.size();
    return static_cast<double>(shared) / static_cast<double>(base);
}

// --------------------------------------------------------------- endpoint

struct CompletionEndpointConfig {
    std::string base_url = "http://127.0.0.1:8089/v1";
    std::string model_name = "gpt-3.5-turbo";
    std::string api_key_env = "MGTD_API_KEY";
    double timeout_seconds = 60.0;
    double temperature = 1.0;
    int max_rate_limit_retries = 3;
    double backoff_seconds = 1.0;  // doubled after every rate-limited attempt

    /// Safe to persist: names the key variable, never its value.
    nlohmann::ordered_json to_json() const {
        return {{"base_url", base_url},
                {"model_name", model_name},
                {"api_key_env", api_key_env},
                {"timeout_seconds", timeout_seconds},
                {"temperature", temperature}};
    }
};

using CompletionFn = std::function<std::string(const std::string& prompt)>;

/// POSTs {model, messages, temperature} to <base_url>/chat/completions and
/// returns the first choice's message content. 429 responses are retried
/// with exponential backoff.
class HttpCompletionClient {
public:
    explicit HttpCompletionClient(CompletionEndpointConfig cfg) : cfg_(std::move(cfg)) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (!key || !*key) throw Error(ErrorCode::AuthFailure, "environment variable " + cfg_.api_key_env + " is not set");
        key_ = key;
        url_ = detail::parse_url(cfg_.base_url);
    }

    std::string operator()(const std::string& prompt) const {
        httplib::Client cli(url_.scheme_host_port);
        const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
        const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        cli.set_bearer_token_auth(key_);
        const nlohmann::json body = {{"model", cfg_.model_name},
                                     {"messages", {{{"role", "user"}, {"content", prompt}}}},
                                     {"temperature", cfg_.temperature}};
        const auto payload = body.dump();
        double backoff = cfg_.backoff_seconds;
        for (int attempt = 0;; ++attempt) {
            auto res = cli.Post(url_.path + "/chat/completions", payload, "application/json");
            if (!res) throw Error(ErrorCode::EndpointUnreachable, "cannot reach " + cfg_.base_url + ": " + httplib::to_string(res.error()));
            if (res->status == 401 || res->status == 403)
                throw Error(ErrorCode::AuthFailure, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
            if (res->status == 429) {
                if (attempt >= cfg_.max_rate_limit_retries) throw Error(ErrorCode::RateLimited, "endpoint rate limit persisted");
                std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
                backoff *= 2.0;
                continue;
            }
            if (res->status != 200)
                throw Error(ErrorCode::EndpointUnreachable, "endpoint returned HTTP " + std::to_string(res->status));
            try {
                const auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::EndpointUnreachable, std::string("malformed endpoint response: ") + e.what());
            }
        }
    }

private:
    CompletionEndpointConfig cfg_;
    std::string key_;
    detail::ParsedUrl url_;
};

// -------------------------------------------------------------- audit log

/// Append-only JSONL, one record per endpoint call.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(const std::filesystem::path& path) : out_(std::make_unique<std::ofstream>(path, std::ios::app)) {
        if (!*out_) throw Error(ErrorCode::Io, "cannot open audit log " + path.string());
    }

    void append(const nlohmann::ordered_json& record) {
        std::lock_guard<std::mutex> lock(mu_);
        records_.push_back(record);
        if (out_) {
            *out_ << record.dump() << '\n';
            out_->flush();
        }
    }

    std::vector<nlohmann::ordered_json> records() const {
        std::lock_guard<std::mutex> lock(mu_);
        return records_;
    }

private:
    mutable std::mutex mu_;
    std::unique_ptr<std::ofstream> out_;
    std::vector<nlohmann::ordered_json> records_;
};

// ------------------------------------------------------------- generation

struct RephraseOutcome {
    bool accepted = false;
    std::string text;  // accepted candidate, or the best rejected one
    int attempts = 0;
    double final_ratio = 0.0;
};

/// Requests candidates until one reaches the overlap threshold or
/// max_attempts is used up.
inline RephraseOutcome generate_rephrased(const RephraseRequest& req, PromptTemplate tmpl, const CompletionFn& complete,
                                          AuditLog* audit = nullptr, const std::string& doc_id = "") {
    if (req.max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be at least 1");
    const auto prompt = build_prompt(req, tmpl);
    const auto prompt_hash = sha256_hex(prompt);
    RephraseOutcome best;
    best.final_ratio = -1.0;
    for (int attempt = 1; attempt <= req.max_attempts; ++attempt) {
        const auto t0 = std::chrono::steady_clock::now();
        auto candidate = complete(prompt);
        const auto latency =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        double ratio = 0.0;
        if (!token_types(candidate).empty()) ratio = overlap_ratio(req.human_text, candidate);
        const bool accepted = ratio >= req.overlap_threshold;
        if (audit)
            audit->append({{"doc_id", doc_id},
                           {"attempt", attempt},
                           {"ratio", ratio},
                           {"accepted", accepted},
                           {"latency_ms", latency},
                           {"prompt_sha256", prompt_hash}});
        if (ratio > best.final_ratio) {
            best.text = std::move(candidate);
            best.final_ratio = ratio;
        }
        best.attempts = attempt;
        if (accepted) {
            best.accepted = true;
            return best;
        }
    }
    return best;
}

struct RephraseSettings {
    PromptTemplate tmpl = PromptTemplate::TweetMimic;
    double threshold = 0.6;
    int max_attempts = 5;
    std::optional<std::size_t> char_limit = 280;
    std::size_t in_flight = 4;
};

struct RephrasedDocument {
    Document doc;  // the new machine document
    std::string source_doc_id;
    RephraseOutcome outcome;
    std::optional<std::string> error;
};

struct RephraseRun {
    std::vector<RephrasedDocument> items;  // one per human document, corpus order

    std::size_t accepted() const {
        std::size_t n = 0;
        for (const auto& i : items) n += !i.error && i.outcome.accepted;
        return n;
    }
    std::size_t rejected() const {
        std::size_t n = 0;
        for (const auto& i : items) n += !i.error && !i.outcome.accepted;
        return n;
    }
    std::size_t failed() const {
        std::size_t n = 0;
        for (const auto& i : items) n += i.error.has_value();
        return n;
    }

    /// Human documents of `original` plus every accepted rephrasing.
    Corpus corpus(const Corpus& original) const {
        Corpus c;
        for (const auto& d : original.documents)
            if (d.label == Label::Human) c.documents.push_back(d);
        for (const auto& i : items)
            if (!i.error && i.outcome.accepted) c.documents.push_back(i.doc);
        c.provenance = original.provenance;
        c.cleaning = original.cleaning;
        return c;
    }
};

/// Rephrases every human document of `corpus`. Endpoint errors are recorded
/// per document; at most `in_flight` calls run at once.
inline RephraseRun rephrase_corpus(const Corpus& corpus, const RephraseSettings& s, const CompletionFn& complete,
                                   AuditLog* audit = nullptr) {
    std::vector<const Document*> humans;
    for (const auto& d : corpus.documents)
        if (d.label == Label::Human) humans.push_back(&d);
    RephraseRun run;
    run.items.resize(humans.size());
    parallel_for(
        humans.size(),
        [&](std::size_t i) {
            const auto& src = *humans[i];
            auto& item = run.items[i];
            item.source_doc_id = src.id;
            RephraseRequest req;
            req.human_text = src.text;
            req.overlap_threshold = s.threshold;
            req.max_attempts = s.max_attempts;
            req.char_limit = s.char_limit;
            req.title = src.text;
            req.topic = src.source.empty() ? "any topic" : src.source;
            try {
                item.outcome = generate_rephrased(req, s.tmpl, complete, audit, src.id);
                item.doc = {src.id + "-r", item.outcome.text, Label::Machine, src.source};
            } catch (const Error& e) {
                item.error = std::string(to_string(e.code())) + ": " + e.what();
            }
        },
        std::max<std::size_t>(1, s.in_flight));
    return run;
}

/// Writes the combined corpus; rephrased lines carry source_doc_id,
/// attempts and ratio.
inline void write_rephrased_jsonl(const RephraseRun& run, const Corpus& original, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& d : original.documents)
        if (d.label == Label::Human)
            out << nlohmann::ordered_json{{"id", d.id}, {"text", d.text}, {"label", 0}, {"source", d.source}}.dump()
                << '\n';
    for (const auto& i : run.items) {
        if (i.error || !i.outcome.accepted) continue;
        out << nlohmann::ordered_json{{"id", i.doc.id},
                                      {"text", i.doc.text},
                                      {"label", 1},
                                      {"source", i.doc.source},
                                      {"source_doc_id", i.source_doc_id},
                                      {"attempts", i.outcome.attempts},
                                      {"ratio", i.outcome.final_ratio}}
                   .dump()
            << '\n';
    }
}

inline nlohmann::ordered_json rephrase_summary(const RephraseRun& run) {
    nlohmann::ordered_json rejects = nlohmann::ordered_json::array();
    for (const auto& i : run.items) {
        if (i.error) rejects.push_back({{"source_doc_id", i.source_doc_id}, {"error", *i.error}});
        else if (!i.outcome.accepted)
            rejects.push_back({{"source_doc_id", i.source_doc_id},
                               {"attempts", i.outcome.attempts},
                               {"best_ratio", i.outcome.final_ratio}});
    }
    return {{"requested", run.items.size()},
            {"accepted", run.accepted()},
            {"rejected", run.rejected()},
            {"failed", run.failed()},
            {"not_accepted", rejects}};
}

// ------------------------------------------------------------- robustness

struct TopicRow {
    std::string topic;
    std::optional<PartitionResult> train;  // pooled cross-validation predictions
    std::optional<PartitionResult> test;
};

struct RobustnessReport {
    std::vector<EvalReport> before;
    std::vector<EvalReport> after;
};

inline RobustnessReport robustness_eval(const Corpus& original, const Corpus& rephrased, const EvalConfig& cfg,
                                        double test_fraction = 0.1, int n_folds = 5, std::uint64_t split_seed = 42) {
    RobustnessReport r;
    r.before = cross_validate(original, make_split(original, test_fraction, n_folds, split_seed), cfg);
    r.after = cross_validate(rephrased, make_split(rephrased, test_fraction, n_folds, split_seed), cfg);
    return r;
}

/// Per-source metrics for one report, followed by the merged row.
inline std::vector<TopicRow> topic_breakdown(const EvalReport& rep) {
    std::set<std::string> topics;
    for (const auto& p : rep.oof_predictions) topics.insert(p.source);
    for (const auto& p : rep.test_predictions) topics.insert(p.source);
    auto subset = [](const std::vector<PredictionRecord>& preds, const std::string* topic) {
        std::vector<PredictionRecord> out;
        for (const auto& p : preds)
            if (!topic || p.source == *topic) out.push_back(p);
        return out;
    };
    auto result = [](const std::vector<PredictionRecord>& preds) -> std::optional<PartitionResult> {
        if (preds.empty()) return std::nullopt;
        return partition_result(preds);
    };
    std::vector<TopicRow> rows;
    if (topics.size() > 1)
        for (const auto& t : topics)
            rows.push_back({t.empty() ? "(none)" : t, result(subset(rep.oof_predictions, &t)),
                            result(subset(rep.test_predictions, &t))});
    rows.push_back({"Merged (all)", result(rep.oof_predictions), result(rep.test_predictions)});
    return rows;
}

namespace detail {

inline std::string signed_points(double delta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f", 100.0 * delta);
    return buf;
}

inline std::string md_topic_cells(const std::optional<PartitionResult>& r, Averaging a) {
    if (!r) return " n/a | n/a | n/a | n/a |";
    const auto& m = r->by(a);
    return " " + percent(m.accuracy) + " | " + percent(m.precision) + " | " + percent(m.recall) + " | " +
           percent(m.f1) + " |";
}

} // namespace detail

/// Before / after / change tables in the results-table layout, then a
/// per-topic breakdown (train = pooled cross-validation, test = blind test)
/// for each model on the rephrased data.
inline std::string robustness_markdown(const RobustnessReport& rep, Averaging a = Averaging::Weighted) {
    std::ostringstream out;
    auto table = [&](const std::string& title, const std::vector<EvalReport>& reports) {
        out << "## " << title << " (" << to_string(a) << " averaging)\n\n" << detail::kMdMetricHeader;
        for (const auto& r : reports) {
            if (r.error) out << "| " << display_name(r.model_kind) << " | failed | | | |\n";
            else if (r.test) out << detail::md_metric_row(display_name(r.model_kind), r.test->by(a));
        }
        out << "\n";
    };
    table("Original data", rep.before);
    table("Rephrased data", rep.after);
    out << "## Change (percentage points, rephrased minus original)\n\n" << detail::kMdMetricHeader;
    for (std::size_t i = 0; i < rep.before.size() && i < rep.after.size(); ++i) {
        const auto& b = rep.before[i];
        const auto& f = rep.after[i];
        if (!b.test || !f.test) continue;
        const auto& mb = b.test->by(a);
        const auto& mf = f.test->by(a);
        out << "| " << display_name(b.model_kind) << " | " << detail::signed_points(mf.accuracy - mb.accuracy) << " | "
            << detail::signed_points(mf.precision - mb.precision) << " | "
            << detail::signed_points(mf.recall - mb.recall) << " | " << detail::signed_points(mf.f1 - mb.f1) << " |\n";
    }
    out << "\n";
    for (const auto& r : rep.after) {
        if (r.error) continue;
        out << "## Rephrased data by topic: " << display_name(r.model_kind) << "\n\n";
        out << "| Topic | Train Acc | Train P | Train R | Train F1 | Test Acc | Test P | Test R | Test F1 |\n"
            << "|---|---|---|---|---|---|---|---|---|\n";
        for (const auto& row : topic_breakdown(r))
            out << "| " << row.topic << " |" << detail::md_topic_cells(row.train, a)
                << detail::md_topic_cells(row.test, a) << "\n";
        out << "\n";
    }
    return out.str();
}

inline std::string robustness_csv(const RobustnessReport& rep) {
    std::ostringstream out;
    csv::write_row(out, {"model", "averaging", "metric", "original", "rephrased", "delta"});
    for (std::size_t i = 0; i < rep.before.size() && i < rep.after.size(); ++i) {
        const auto& b = rep.before[i];
        const auto& f = rep.after[i];
        if (!b.test || !f.test) continue;
        for (auto a : {Averaging::Positive, Averaging::Weighted}) {
            const auto& mb = b.test->by(a);
            const auto& mf = f.test->by(a);
            const std::pair<const char*, std::pair<double, double>> rows[] = {
                {"accuracy", {mb.accuracy, mf.accuracy}},
                {"precision", {mb.precision, mf.precision}},
                {"recall", {mb.recall, mf.recall}},
                {"f1", {mb.f1, mf.f1}}};
            for (const auto& [name, v] : rows)
                csv::write_row(out, {std::string(to_string(b.model_kind)), std::string(to_string(a)), name,
                                     detail::fixed(v.first), detail::fixed(v.second),
                                     detail::fixed(v.second - v.first)});
        }
    }
    return out.str();
}

inline void write_robustness_reports(const RobustnessReport& rep, const std::filesystem::path& dir) {
    write_text_file(dir / "robustness.md", robustness_markdown(rep));
    write_text_file(dir / "robustness.csv", robustness_csv(rep));
    write_eval_reports(rep.before, dir / "original");
    write_eval_reports(rep.after, dir / "rephrased");
}

} // namespace mgtd
