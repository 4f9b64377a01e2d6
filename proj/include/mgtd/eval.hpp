#pragma once

// k-fold cross-validation plus blind-test evaluation, and CSV / Markdown
// report emission.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/corpus.hpp"
#include "mgtd/csv.hpp"
#include "mgtd/metrics.hpp"
#include "mgtd/models.hpp"
#include "mgtd/tfidf.hpp"

namespace mgtd {

/// Table label for a model kind (the MLP is listed as "Seq").
inline std::string display_name(ModelKind k) {
    if (k == ModelKind::MLP) return "Seq";
    std::string s(to_string(k));
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

struct PredictionRecord {
    std::string id;
    std::string source;
    int y_true = 0;
    int y_pred = 0;
    double score = 0.0;

    bool operator==(const PredictionRecord&) const = default;
};

struct PartitionResult {
    ConfusionMatrix cm;
    Metrics positive;
    Metrics weighted;

    const Metrics& by(Averaging a) const { return a == Averaging::Positive ? positive : weighted; }
    bool operator==(const PartitionResult&) const = default;
};

inline PartitionResult partition_result(const ConfusionMatrix& cm) {
    return {cm, metrics(cm, Averaging::Positive), metrics(cm, Averaging::Weighted)};
}

inline PartitionResult partition_result(const std::vector<PredictionRecord>& preds) {
    std::vector<int> t, p;
    for (const auto& r : preds) {
        t.push_back(r.y_true);
        p.push_back(r.y_pred);
    }
    return partition_result(confusion(t, p));
}

struct EvalReport {
    ModelKind model_kind = ModelKind::LR;
    std::string dataset;
    std::vector<PartitionResult> folds;  // index i is fold i + 1
    std::optional<PartitionResult> test;
    std::vector<PredictionRecord> oof_predictions;   // validation predictions pooled over folds
    std::vector<PredictionRecord> test_predictions;  // blind test predictions
    std::optional<std::string> error;
    nlohmann::ordered_json manifest = nlohmann::ordered_json::object();

    bool ok() const { return !error.has_value(); }

    Metrics fold_mean(Averaging a) const {
        Metrics m;
        if (folds.empty()) return m;
        for (const auto& f : folds) {
            m.accuracy += f.by(a).accuracy;
            m.precision += f.by(a).precision;
            m.recall += f.by(a).recall;
            m.f1 += f.by(a).f1;
        }
        const double n = static_cast<double>(folds.size());
        return {m.accuracy / n, m.precision / n, m.recall / n, m.f1 / n};
    }

    bool operator==(const EvalReport& o) const {
        return model_kind == o.model_kind && dataset == o.dataset && folds == o.folds && test == o.test &&
               oof_predictions == o.oof_predictions && test_predictions == o.test_predictions && error == o.error &&
               manifest == o.manifest;
    }
};

struct EvalConfig {
    std::vector<ModelKind> models = {ModelKind::LR};
    ModelConfigs model_cfgs;
    TfidfConfig tfidf;
    std::string dataset = "dataset";
    bool run_folds = true;
    /// Called with (partition, vectorizer) right after each fit; partition 0 is
    /// the final fit on the whole training pool.
    std::function<void(int, const TfidfModel&)> on_vectorizer;
    /// Called with each final model (trained on the whole pool).
    std::function<void(const TrainedModel&, const TfidfModel&)> on_final_model;
};

namespace detail {

struct PartitionDocs {
    std::vector<const Document*> train;
    std::vector<const Document*> eval;
};

inline PartitionDocs partition_docs(const Corpus& corpus, const SplitPlan& split, int partition) {
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : corpus.documents) by_id.emplace(d.id, &d);
    PartitionDocs out;
    for (const auto& [id, p] : split.assignments) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error(ErrorCode::InvalidArgument, "split references unknown document " + id);
        const bool is_eval = p == partition;
        const bool is_train = partition == SplitPlan::kTest ? p != SplitPlan::kTest : (p != SplitPlan::kTest && p != partition);
        if (is_eval) out.eval.push_back(it->second);
        else if (is_train) out.train.push_back(it->second);
    }
    return out;
}

inline std::vector<int> labels_of(const std::vector<const Document*>& docs) {
    std::vector<int> y;
    y.reserve(docs.size());
    for (const auto* d : docs) y.push_back(to_int(d->label));
    return y;
}

} // namespace detail

/// Vectorizer for one partition, fitted on that partition's training
/// documents only. Partition 0 fits on the whole training pool.
inline TfidfModel fit_partition_vectorizer(const Corpus& corpus, const SplitPlan& split, int partition,
                                           const TfidfConfig& cfg) {
    return fit_tfidf(detail::partition_docs(corpus, split, partition).train, cfg);
}

/// Evaluates every requested model on each fold (vectorizer and model refit
/// on the other folds) and on the blind test set (refit on the whole pool).
/// A model whose training fails is reported with `error` set; the other
/// models continue.
inline std::vector<EvalReport> cross_validate(const Corpus& corpus, const SplitPlan& split, const EvalConfig& cfg) {
    std::vector<EvalReport> reports(cfg.models.size());
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        auto& r = reports[m];
        r.model_kind = cfg.models[m];
        r.dataset = cfg.dataset;
        const auto test_ids = split.ids_in(SplitPlan::kTest);
        r.manifest["dataset"] = cfg.dataset;
        r.manifest["model"] = std::string(to_string(cfg.models[m]));
        r.manifest["n_documents"] = split.assignments.size();
        r.manifest["split"] = {{"test_fraction", split.test_fraction},
                               {"n_folds", split.n_folds},
                               {"seed", split.seed},
                               {"test_size", test_ids.size()},
                               {"pool_size", split.assignments.size() - test_ids.size()}};
        r.manifest["tfidf"] = cfg.tfidf.to_json();
        r.manifest["cleaning"] = corpus.cleaning ? nlohmann::ordered_json(corpus.cleaning->to_json()) : nlohmann::ordered_json();
        r.manifest["seed"] = cfg.model_cfgs.seed_of(cfg.models[m]);
        r.manifest["hyperparameters"] = cfg.model_cfgs.to_json();
    }

    std::vector<int> partitions;
    if (cfg.run_folds)
        for (int f = 1; f <= split.n_folds; ++f) partitions.push_back(f);
    partitions.push_back(SplitPlan::kTest);

    for (int part : partitions) {
        const auto docs = detail::partition_docs(corpus, split, part);
        if (part == SplitPlan::kTest && docs.eval.empty() && !cfg.on_final_model) continue;
        std::optional<TfidfModel> tf;
        std::optional<Error> vec_error;
        try {
            tf = fit_tfidf(docs.train, cfg.tfidf);
        } catch (const Error& e) {
            vec_error = e;
        }
        if (vec_error) {
            for (auto& r : reports)
                if (!r.error) r.error = std::string(to_string(vec_error->code())) + ": " + vec_error->what();
            continue;
        }
        if (cfg.on_vectorizer) cfg.on_vectorizer(part, *tf);
        const auto Xtr = tf->transform_all(docs.train);
        const auto Xev = tf->transform_all(docs.eval);
        const auto ytr = detail::labels_of(docs.train);

        std::vector<std::optional<TrainedModel>> finals(cfg.models.size());
        parallel_for(cfg.models.size(), [&](std::size_t m) {
            auto& r = reports[m];
            if (r.error) return;
            try {
                auto model = train_model(cfg.models[m], Xtr, ytr, tf->dim(), cfg.model_cfgs);
                std::vector<PredictionRecord> preds;
                preds.reserve(docs.eval.size());
                for (std::size_t i = 0; i < docs.eval.size(); ++i) {
                    const auto p = predict(model, Xev[i]);
                    preds.push_back({docs.eval[i]->id, docs.eval[i]->source, to_int(docs.eval[i]->label), p.label, p.score});
                }
                if (part == SplitPlan::kTest) {
                    if (!preds.empty()) r.test = partition_result(preds);
                    r.test_predictions = std::move(preds);
                    finals[m] = std::move(model);
                } else {
                    r.folds.push_back(partition_result(preds));
                    r.oof_predictions.insert(r.oof_predictions.end(), preds.begin(), preds.end());
                }
            } catch (const Error& e) {
                r.error = std::string(to_string(e.code())) + ": " + e.what();
            } catch (const std::exception& e) {
                r.error = std::string("InternalError: ") + e.what();
            }
        });
        if (cfg.on_final_model)
            for (const auto& f : finals)
                if (f) cfg.on_final_model(*f, *tf);
    }
    for (auto& r : reports)
        if (r.error) {
            r.folds.clear();
            r.test.reset();
            r.oof_predictions.clear();
            r.test_predictions.clear();
        }
    return reports;
}

// ------------------------------------------------------------ emission

namespace detail {

inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string general(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string percent(double v) { return fixed(100.0 * v, 2) + "%"; }

inline void metric_cells(std::vector<std::string>& row, const Metrics& m) {
    row.push_back(fixed(m.accuracy));
    row.push_back(fixed(m.precision));
    row.push_back(fixed(m.recall));
    row.push_back(fixed(m.f1));
}

inline void cm_cells(std::vector<std::string>& row, const ConfusionMatrix& cm) {
    for (auto v : {cm.tp, cm.fp, cm.fn, cm.tn}) row.push_back(std::to_string(v));
}

inline std::string md_metric_row(const std::string& label, const Metrics& m) {
    return "| " + label + " | " + percent(m.accuracy) + " | " + percent(m.precision) + " | " + percent(m.recall) +
           " | " + percent(m.f1) + " |\n";
}

inline constexpr const char* kMdMetricHeader = "| Model | Acc | P | R | F1 |\n|---|---|---|---|---|\n";

} // namespace detail

inline std::string eval_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    csv::write_row(out, {"model", "dataset", "partition", "averaging", "accuracy", "precision", "recall", "f1", "tp",
                         "fp", "fn", "tn", "error"});
    for (const auto& r : reports) {
        const std::string model(to_string(r.model_kind));
        if (r.error) {
            csv::write_row(out, {model, r.dataset, "", "", "", "", "", "", "", "", "", "", *r.error});
            continue;
        }
        auto emit = [&](const std::string& part, const PartitionResult& pr) {
            for (auto a : {Averaging::Positive, Averaging::Weighted}) {
                std::vector<std::string> row{model, r.dataset, part, std::string(to_string(a))};
                detail::metric_cells(row, pr.by(a));
                detail::cm_cells(row, pr.cm);
                row.emplace_back();
                csv::write_row(out, row);
            }
        };
        for (std::size_t f = 0; f < r.folds.size(); ++f) emit("fold" + std::to_string(f + 1), r.folds[f]);
        if (r.test) emit("test", *r.test);
    }
    return out.str();
}

inline std::string eval_markdown(const std::vector<EvalReport>& reports, Averaging display = Averaging::Weighted) {
    const std::string dataset = reports.empty() ? "" : reports.front().dataset;
    std::ostringstream out;
    const Averaging other = display == Averaging::Weighted ? Averaging::Positive : Averaging::Weighted;
    for (auto a : {display, other}) {
        out << "## Blind test: " << dataset << " (" << to_string(a) << " averaging)\n\n" << detail::kMdMetricHeader;
        for (const auto& r : reports) {
            if (r.error) out << "| " << display_name(r.model_kind) << " | failed | | | |\n";
            else if (r.test) out << detail::md_metric_row(display_name(r.model_kind), r.test->by(a));
        }
        out << "\n";
    }
    out << "## Cross-validation: " << dataset << " (" << to_string(display) << " averaging, fold mean)\n\n"
        << detail::kMdMetricHeader;
    for (const auto& r : reports)
        if (!r.error && !r.folds.empty()) out << detail::md_metric_row(display_name(r.model_kind), r.fold_mean(display));
    out << "\n";
    bool any_error = false;
    for (const auto& r : reports) any_error = any_error || r.error.has_value();
    if (any_error) {
        out << "## Failures\n\n";
        for (const auto& r : reports)
            if (r.error) out << "- " << display_name(r.model_kind) << ": " << *r.error << "\n";
        out << "\n";
    }
    return out.str();
}

inline nlohmann::ordered_json eval_manifest(const std::vector<EvalReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        auto m = r.manifest;
        m["status"] = r.error ? *r.error : "ok";
        arr.push_back(m);
    }
    return arr;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

/// Writes eval_report.csv, eval_report.md, eval_manifest.json and
/// eval_predictions.csv under `dir`.
inline void write_eval_reports(const std::vector<EvalReport>& reports, const std::filesystem::path& dir) {
    write_text_file(dir / "eval_report.csv", eval_csv(reports));
    write_text_file(dir / "eval_report.md", eval_markdown(reports));
    write_text_file(dir / "eval_manifest.json", eval_manifest(reports).dump(2) + "\n");
    std::ostringstream preds;
    csv::write_row(preds, {"model", "partition", "id", "source", "label", "predicted", "score"});
    for (const auto& r : reports) {
        for (const auto& p : r.oof_predictions)
            csv::write_row(preds, {std::string(to_string(r.model_kind)), "cv", p.id, p.source, std::to_string(p.y_true),
                                   std::to_string(p.y_pred), detail::fixed(p.score, 9)});
        for (const auto& p : r.test_predictions)
            csv::write_row(preds, {std::string(to_string(r.model_kind)), "test", p.id, p.source,
                                   std::to_string(p.y_true), std::to_string(p.y_pred), detail::fixed(p.score, 9)});
    }
    write_text_file(dir / "eval_predictions.csv", preds.str());
}

} // namespace mgtd
