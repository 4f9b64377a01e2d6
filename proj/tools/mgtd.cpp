#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mgtd/mgtd.hpp"

namespace {

using namespace mgtd;
namespace fs = std::filesystem;

struct Common {
    std::uint64_t seed = 42;
    std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "root seed for every random choice")->capture_default_str();
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<ModelKind> parse_models(const std::string& s) {
    if (s == "all") return {std::begin(kAllModelKinds), std::end(kAllModelKinds)};
    std::vector<ModelKind> out;
    for (const auto& name : split_list(s)) {
        const auto k = parse_model_kind(name);
        if (!k) throw CLI::ValidationError("--models", "unknown model " + name);
        out.push_back(*k);
    }
    if (out.empty()) throw CLI::ValidationError("--models", "no models given");
    return out;
}

/// "text=tweet,label=is_bot,id=synthesize" style column mapping.
Schema parse_schema(const std::string& spec, const std::string& fallback_source) {
    Schema s;
    s.source = fallback_source;
    for (const auto& item : split_list(spec)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--schema", "expected key=value, got " + item);
        const auto key = trim(item.substr(0, eq)), value = trim(item.substr(eq + 1));
        if (key == "id") s.id_column = value;
        else if (key == "text") s.text_column = value;
        else if (key == "label") s.label_column = value;
        else if (key == "human") s.human_text_column = value;
        else if (key == "machine") s.machine_text_column = value;
        else if (key == "source") s.source = value;
        else if (key == "source-column") s.source_column = value;
        else if (key == "id-prefix") s.id_prefix = value;
        else throw CLI::ValidationError("--schema", "unknown key " + key);
    }
    if (s.human_text_column.empty() != s.machine_text_column.empty())
        throw CLI::ValidationError("--schema", "human and machine columns go together");
    return s;
}

struct EvalFlags {
    std::string corpus;
    std::string models = "all";
    int folds = 5;
    double test_fraction = 0.1;
    std::string dataset;
    int ngram_max = 1;
    std::size_t max_features = 50000;
    std::size_t min_df = 1;
    bool sublinear_tf = false;
    std::string vc_mode = "hard";
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f, bool with_folds) {
    if (with_folds) cmd->add_option("--folds", f.folds, "cross-validation folds")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--models", f.models, "comma list of lr,dt,rf,mnb,sgd,svm,vc,mlp or all")->capture_default_str();
    cmd->add_option("--test-fraction", f.test_fraction, "blind test share")->check(CLI::Range(0.0, 0.99))->capture_default_str();
    cmd->add_option("--dataset", f.dataset, "dataset name used in reports (defaults to the corpus file stem)");
    cmd->add_option("--ngram-max", f.ngram_max, "1 for unigrams, 2 adds bigrams")->check(CLI::Range(1, 2))->capture_default_str();
    cmd->add_option("--max-features", f.max_features, "vocabulary cap")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--min-df", f.min_df, "minimum document frequency")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--sublinear-tf", f.sublinear_tf, "use 1 + log(tf)");
    cmd->add_option("--vc-mode", f.vc_mode, "voting mode")->check(CLI::IsMember({"hard", "soft"}))->capture_default_str();
}

EvalConfig make_eval_config(const EvalFlags& f, std::uint64_t seed, const fs::path& corpus_path) {
    EvalConfig cfg;
    cfg.models = parse_models(f.models);
    cfg.model_cfgs.with_seed(seed);
    cfg.model_cfgs.vc_mode = f.vc_mode == "soft" ? VoteMode::Soft : VoteMode::Hard;
    cfg.tfidf.ngram_max = f.ngram_max;
    cfg.tfidf.max_features = f.max_features;
    cfg.tfidf.min_df = f.min_df;
    cfg.tfidf.sublinear_tf = f.sublinear_tf;
    cfg.dataset = f.dataset.empty() ? corpus_path.stem().string() : f.dataset;
    return cfg;
}

void record_model_seeds(RunManifest& m, const EvalConfig& cfg) {
    for (auto k : cfg.models) m.seeds["model." + std::string(to_string(k))] = cfg.model_cfgs.seed_of(k);
}

/// 0 unless every report failed.
int reports_exit_code(const std::vector<EvalReport>& reports) {
    for (const auto& r : reports)
        if (r.ok()) return 0;
    for (const auto& r : reports) std::cerr << "error: " << to_string(r.model_kind) << ": " << *r.error << "\n";
    return 1;
}

void print_test_summary(const std::vector<EvalReport>& reports) {
    for (const auto& r : reports) {
        std::printf("%-4s ", std::string(display_name(r.model_kind)).c_str());
        if (!r.ok())
            std::printf("failed: %s\n", r.error->c_str());
        else if (r.test)
            std::printf("test accuracy %.4f  f1 %.4f\n", r.test->weighted.accuracy, r.test->weighted.f1);
        else
            std::printf("no test partition\n");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stylometric analysis and machine-generated text detection"};
    app.set_version_flag("--version", std::string(MGTD_VERSION));
    auto* config_opt = app.set_config("--config", "", "key=value config file; command-line flags win");
    app.require_subcommand(1);

    Common common;
    RunManifest manifest;
    for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load, clean and store a corpus as JSONL");
    std::vector<std::string> ingest_inputs, ingest_human, ingest_machine;
    std::string ingest_format, ingest_family, ingest_schema;
    std::optional<bool> ingest_stopwords;
    bool ingest_keep_non_english = false;
    std::size_t ingest_subsample = 0;
    add_common(ingest, common);
    ingest->add_option("--input", ingest_inputs, "labelled CSV or JSONL file (repeatable)");
    ingest->add_option("--human", ingest_human, "file whose rows are all human text (repeatable)");
    ingest->add_option("--machine", ingest_machine, "file whose rows are all machine text (repeatable)");
    ingest->add_option("--format", ingest_format, "csv or jsonl (default: from the extension)")->check(CLI::IsMember({"csv", "jsonl"}));
    ingest->add_option("--dataset-family", ingest_family, "openai, wiki, pubmed or twitter")
        ->required()
        ->check(CLI::IsMember({"openai", "wiki", "pubmed", "twitter"}));
    ingest->add_option("--schema", ingest_schema, "column map: id=,text=,label=,human=,machine=,source=,source-column=,id-prefix=");
    ingest->add_option("--remove-stopwords", ingest_stopwords, "override the family's stopword default (true/false)");
    ingest->add_flag("--keep-non-english", ingest_keep_non_english, "skip the English filter");
    ingest->add_option("--subsample", ingest_subsample, "keep a balanced random subsample of this many documents");

    // profile
    auto* profile = app.add_subcommand("profile", "readability, bias, moral and sentiment comparison");
    std::string profile_corpus, profile_families = "readability,bias,moral,sentiment", profile_dataset;
    add_common(profile, common);
    profile->add_option("--corpus", profile_corpus, "corpus JSONL from ingest")->required();
    profile->add_option("--families", profile_families, "comma list of feature families")->capture_default_str();
    profile->add_option("--dataset", profile_dataset, "dataset name used in reports");

    // train / eval
    auto* train = app.add_subcommand("train", "fit models on the training pool and score the blind test set");
    EvalFlags train_flags;
    add_common(train, common);
    train->add_option("--corpus", train_flags.corpus, "corpus JSONL from ingest")->required();
    add_eval_flags(train, train_flags, false);

    auto* eval = app.add_subcommand("eval", "cross-validate models and score the blind test set");
    EvalFlags eval_flags;
    bool eval_save_models = false;
    add_common(eval, common);
    eval->add_option("--corpus", eval_flags.corpus, "corpus JSONL from ingest")->required();
    add_eval_flags(eval, eval_flags, true);
    eval->add_flag("--save-models", eval_save_models, "also write the final models");

    // rephrase
    auto* rephrase = app.add_subcommand("rephrase", "generate machine rephrasings of the human documents");
    std::string rephrase_corpus_path, rephrase_template = "tweet_mimic";
    RephraseSettings rs;
    std::size_t char_limit = 280;
    CompletionEndpointConfig endpoint;
    add_common(rephrase, common);
    rephrase->add_option("--corpus", rephrase_corpus_path, "corpus JSONL from ingest")->required();
    rephrase->add_option("--template", rephrase_template, "prompt template")
        ->check(CLI::IsMember({"tweet_generic", "tweet_mimic", "abstract_from_title"}))
        ->capture_default_str();
    rephrase->add_option("--threshold", rs.threshold, "minimum vocabulary overlap")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    rephrase->add_option("--max-attempts", rs.max_attempts, "attempts per document")->check(CLI::PositiveNumber)->capture_default_str();
    rephrase->add_option("--char-limit", char_limit, "character limit put in the prompt")->capture_default_str();
    rephrase->add_option("--in-flight", rs.in_flight, "concurrent endpoint calls")->check(CLI::PositiveNumber)->capture_default_str();
    rephrase->add_option("--base-url", endpoint.base_url, "completion endpoint base URL")->envname("MGTD_BASE_URL")->capture_default_str();
    rephrase->add_option("--model-name", endpoint.model_name, "model requested from the endpoint")->capture_default_str();
    rephrase->add_option("--temperature", endpoint.temperature, "sampling temperature")->capture_default_str();
    rephrase->add_option("--timeout", endpoint.timeout_seconds, "request timeout in seconds")->capture_default_str();

    // robustness
    auto* robust = app.add_subcommand("robustness", "compare model accuracy on original and rephrased corpora");
    std::string robust_original, robust_rephrased;
    EvalFlags robust_flags;
    add_common(robust, common);
    robust->add_option("--original", robust_original, "original corpus JSONL")->required();
    robust->add_option("--rephrased", robust_rephrased, "rephrased corpus JSONL")->required();
    add_eval_flags(robust, robust_flags, true);

    // assets
    auto* verify = app.add_subcommand("verify-assets", "check bundled asset checksums and record counts");
    std::string verify_dir = asset_dir().string();
    add_common(verify, common);
    verify->add_option("--assets", verify_dir, "asset directory")->capture_default_str();

    auto* fetch = app.add_subcommand("fetch-datasets", "download the public datasets into --out");
    FetchOptions fetch_opt;
    std::string fetch_datasets = "gpt2-output,wiki-intro", fetch_variants = "webtext,xl-1542M,large-762M-k40",
                fetch_splits = "train,valid,test", gpt2_url, wiki_url;
    add_common(fetch, common);
    fetch->add_option("--datasets", fetch_datasets, "comma list of dataset ids")->capture_default_str();
    fetch->add_option("--variants", fetch_variants, "GPT-2 output variants")->capture_default_str();
    fetch->add_option("--splits", fetch_splits, "GPT-2 output splits")->capture_default_str();
    fetch->add_option("--gpt2-url", gpt2_url, "override the GPT-2 output base URL");
    fetch->add_option("--wiki-url", wiki_url, "override the Wiki intro archive URL");

    try {
        app.parse(argc, argv);
        for (auto* f : {&train_flags, &eval_flags, &robust_flags}) parse_models(f->models);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto* cmd = app.get_subcommands().front();
    manifest.command = cmd->get_name();
    manifest.seeds["root"] = common.seed;
    const fs::path out = common.out;
    if (config_opt->count() > 0) manifest.set_config(config_opt->as<std::string>());

    int rc = 0;
    try {
        fs::create_directories(out);
        if (cmd == ingest) {
            if (ingest_inputs.empty() && ingest_human.empty() && ingest_machine.empty()) {
                std::cerr << "error: ingest needs --input, --human or --machine\n";
                return 2;
            }
            const auto family = *parse_family(ingest_family);
            Schema schema;
            try {
                schema = parse_schema(ingest_schema, ingest_family);
            } catch (const CLI::ParseError& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
            std::vector<Corpus> parts;
            auto load = [&](const std::string& path, std::optional<Label> label) {
                auto s = schema;
                s.constant_label = label;
                if (label) s.id_prefix += fs::path(path).stem().string() + "-";
                const auto fmt = ingest_format.empty() ? format_from_path(path)
                                                       : (ingest_format == "csv" ? Format::CSV : Format::JSONL);
                parts.push_back(load_corpus(path, fmt, s));
                manifest.add_input(path);
            };
            for (const auto& p : ingest_inputs) load(p, std::nullopt);
            for (const auto& p : ingest_human) load(p, Label::Human);
            for (const auto& p : ingest_machine) load(p, Label::Machine);
            auto cleaning = CleaningConfig::for_family(family);
            if (ingest_stopwords) cleaning.remove_stopwords = *ingest_stopwords;
            cleaning.drop_non_english = !ingest_keep_non_english;
            auto corpus = clean(merge_corpora(std::move(parts)), cleaning);
            if (ingest_subsample > 0) {
                corpus = balanced_subsample(corpus, ingest_subsample, common.seed);
                manifest.seeds["subsample"] = derive_seed(common.seed, "subsample");
            }
            write_corpus_jsonl(corpus, out / "corpus.jsonl");
            nlohmann::ordered_json report;
            report["ingestion"] = corpus.report.to_json();
            report["cleaning"] = cleaning.to_json();
            report["documents"] = corpus.size();
            if (!corpus.documents.empty()) report["stats"] = corpus_stats(corpus).to_json();
            write_text_file(out / "ingestion_report.json", report.dump(2) + "\n");
            manifest.settings = {{"dataset_family", ingest_family}, {"cleaning", cleaning.to_json()}};
            std::printf("%zu documents (%zu human, %zu machine) -> %s\n", corpus.size(), corpus.count(Label::Human),
                        corpus.count(Label::Machine), (out / "corpus.jsonl").c_str());
        } else if (cmd == profile) {
            std::vector<FeatureFamily> families;
            for (const auto& name : split_list(profile_families)) {
                const auto f = parse_feature_family(name);
                if (!f) {
                    std::cerr << "error: unknown feature family " << name << "\n";
                    return 2;
                }
                families.push_back(*f);
            }
            const auto corpus = read_corpus_jsonl(profile_corpus);
            manifest.add_input(profile_corpus);
            const auto dataset = profile_dataset.empty() ? fs::path(profile_corpus).stem().string() : profile_dataset;
            const auto rep = characteristic_report(corpus, families, dataset);
            write_characteristic_reports(rep, out);
            write_text_file(out / "corpus_stats.json", corpus_stats(corpus).to_json().dump(2) + "\n");
            std::printf("%zu metrics -> %s\n", rep.rows.size(), (out / "characteristics.md").c_str());
        } else if (cmd == train || cmd == eval) {
            const auto& flags = cmd == train ? train_flags : eval_flags;
            const bool save = cmd == train || eval_save_models;
            const auto corpus = read_corpus_jsonl(flags.corpus);
            manifest.add_input(flags.corpus);
            auto cfg = make_eval_config(flags, common.seed, flags.corpus);
            cfg.run_folds = cmd == eval;
            record_model_seeds(manifest, cfg);
            manifest.seeds["split"] = derive_seed(common.seed, "split");
            if (save)
                cfg.on_final_model = [&](const TrainedModel& m, const TfidfModel& tf) {
                    fs::create_directories(out / "models");
                    save_model(m, &tf, out / "models" / (std::string(to_string(m.kind)) + ".json"));
                };
            const auto split = make_split(corpus, flags.test_fraction, flags.folds, common.seed);
            const auto reports = cross_validate(corpus, split, cfg);
            write_eval_reports(reports, out);
            manifest.settings = {{"test_fraction", flags.test_fraction},
                                 {"folds", cmd == eval ? flags.folds : 0},
                                 {"tfidf", cfg.tfidf.to_json()},
                                 {"models", cfg.model_cfgs.to_json()}};
            print_test_summary(reports);
            rc = reports_exit_code(reports);
        } else if (cmd == rephrase) {
            rs.tmpl = *parse_prompt_template(rephrase_template);
            rs.char_limit = char_limit;
            const auto corpus = read_corpus_jsonl(rephrase_corpus_path);
            manifest.add_input(rephrase_corpus_path);
            HttpCompletionClient client(endpoint);
            fs::remove(out / "rephrase_audit.jsonl");
            AuditLog audit(out / "rephrase_audit.jsonl");
            const auto run = rephrase_corpus(corpus, rs, std::cref(client), &audit);
            write_rephrased_jsonl(run, corpus, out / "rephrased.jsonl");
            const auto summary = rephrase_summary(run);
            write_text_file(out / "rephrase_summary.json", summary.dump(2) + "\n");
            manifest.settings = {{"template", rephrase_template},
                                 {"threshold", rs.threshold},
                                 {"max_attempts", rs.max_attempts},
                                 {"char_limit", char_limit},
                                 {"endpoint", endpoint.to_json()}};
            for (const auto& item : run.items)
                if (item.error) std::cerr << "error: " << item.source_doc_id << ": " << *item.error << "\n";
            std::printf("accepted %zu, rejected %zu, failed %zu\n", run.accepted(), run.rejected(), run.failed());
            rc = !run.items.empty() && run.failed() == run.items.size() ? 1 : 0;
        } else if (cmd == robust) {
            const auto original = read_corpus_jsonl(robust_original);
            const auto rephrased = read_corpus_jsonl(robust_rephrased);
            manifest.add_input(robust_original);
            manifest.add_input(robust_rephrased);
            const auto cfg = make_eval_config(robust_flags, common.seed, robust_original);
            record_model_seeds(manifest, cfg);
            manifest.seeds["split"] = derive_seed(common.seed, "split");
            const auto rep = robustness_eval(original, rephrased, cfg, robust_flags.test_fraction, robust_flags.folds, common.seed);
            write_robustness_reports(rep, out);
            manifest.settings = {{"test_fraction", robust_flags.test_fraction},
                                 {"folds", robust_flags.folds},
                                 {"tfidf", cfg.tfidf.to_json()}};
            rc = std::max(reports_exit_code(rep.before), reports_exit_code(rep.after));
            std::printf("-> %s\n", (out / "robustness.md").c_str());
        } else if (cmd == verify) {
            const auto rep = verify_assets(fs::path(verify_dir));
            write_text_file(out / "asset_report.json", rep.to_json().dump(2) + "\n");
            std::printf("%zu assets ok, %zu moral categories\n", rep.checks.size(), rep.moral_categories);
        } else if (cmd == fetch) {
            fetch_opt.datasets = split_list(fetch_datasets);
            fetch_opt.gpt2_variants = split_list(fetch_variants);
            fetch_opt.gpt2_splits = split_list(fetch_splits);
            if (!gpt2_url.empty()) fetch_opt.url_overrides["gpt2-output"] = gpt2_url;
            if (!wiki_url.empty()) fetch_opt.url_overrides["wiki-intro"] = wiki_url;
            const auto result = fetch_public_datasets(out, load_catalog(), fetch_opt);
            for (const auto& f : result.files)
                std::printf("%s %s%s\n", f.sha256.c_str(), f.file.c_str(), f.cached ? " (cached)" : "");
            for (const auto& d : result.unavailable) std::printf("%s: %s\n", d.id.c_str(), d.status.c_str());
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        manifest.status = "error";
        manifest.error = e.what();
        rc = 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        manifest.status = "error";
        manifest.error = e.what();
        rc = 1;
    }
    if (rc != 0 && manifest.status == "ok") manifest.status = "error";
    try {
        manifest.write(out);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot write run manifest: " << e.what() << "\n";
        rc = 1;
    }
    return rc;
}
