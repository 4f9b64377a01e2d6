#include <sys/wait.h>

#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "mgtd/mgtd.hpp"
#include "mock_endpoint.hpp"
#include "test_util.hpp"

using namespace mgtd;

namespace {

const std::filesystem::path kFixtures = std::filesystem::path(MGTD_TEST_DIR) / "fixtures";

struct RunResult {
    int rc = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

RunResult run_cli(const test::TempDir& dir, const std::vector<std::string>& args) {
    std::string cmd = quote(MGTD_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = test::read_file(out);
    r.err = test::read_file(err);
    return r;
}

std::filesystem::path write_corpus(const test::TempDir& dir, const Corpus& c, const std::string& name = "corpus.jsonl") {
    const auto p = dir / name;
    write_corpus_jsonl(c, p);
    return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct RunningMock {
    explicit RunningMock(mock::Options opt) : server(std::move(opt)) {
        port = server.bind(0);
        thread = std::thread([this] { server.listen(); });
        server.wait_until_ready();
    }
    ~RunningMock() {
        server.stop();
        thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }

    mock::Server server;
    int port = 0;
    std::thread thread;
};

nlohmann::json without_timestamps(nlohmann::json j) {
    j.erase("started_at");
    j.erase("finished_at");
    return j;
}

} // namespace

// ---------------------------------------------------------------- ingest

TEST(CliIngest, CsvToCorpus) {
    test::TempDir dir;
    const auto csv_path = dir.write("t.csv", "id,text,label\n1,Hello   WORLD 7 ok,0\n2,The machine wrote this,1\n3,,0\n");
    const auto r = run_cli(dir, {"ingest", "--input", csv_path.string(), "--format", "csv", "--dataset-family", "twitter",
                                 "--out", (dir / "out").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto corpus = read_corpus_jsonl(dir / "out/corpus.jsonl");
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus.documents[0].text, "hello world ok");
    const auto report = nlohmann::json::parse(test::read_file(dir / "out/ingestion_report.json"));
    EXPECT_EQ(report["ingestion"]["rows_dropped_missing"], 1);
    EXPECT_FALSE(report["cleaning"]["remove_stopwords"].get<bool>());
    EXPECT_TRUE(std::filesystem::exists(dir / "out/run_manifest.json"));
}

TEST(CliIngest, MissingFileIsDataError) {
    test::TempDir dir;
    const auto r = run_cli(dir, {"ingest", "--input", (dir / "nope.csv").string(), "--dataset-family", "twitter", "--out",
                                 (dir / "out").string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.err.find("file not found"), std::string::npos) << r.err;
    const auto manifest = nlohmann::json::parse(test::read_file(dir / "out/run_manifest.json"));
    EXPECT_EQ(manifest["status"], "error");
}

TEST(CliIngest, UsageErrors) {
    test::TempDir dir;
    EXPECT_EQ(run_cli(dir, {"ingest", "--input", "t.csv", "--dataset-family", "reddit"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"ingest", "--input", "t.csv"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"ingest", "--input", "t.csv", "--dataset-family", "wiki", "--schema", "colour=x"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"frobnicate"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"--help"}).rc, 0);
}

TEST(CliIngest, SingleClassFilesAndSubsample) {
    test::TempDir dir;
    const auto out = dir / "out";
    const auto r = run_cli(dir, {"ingest", "--human", (kFixtures / "webtext.test.jsonl").string(), "--machine",
                                 (kFixtures / "xl-1542M.test.jsonl").string(), "--dataset-family", "openai",
                                 "--schema", "id-prefix=gpt2-", "--subsample", "4", "--out", out.string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto corpus = read_corpus_jsonl(out / "corpus.jsonl");
    EXPECT_EQ(corpus.count(Label::Human), 2u);
    EXPECT_EQ(corpus.count(Label::Machine), 2u);
    const auto manifest = nlohmann::json::parse(test::read_file(out / "run_manifest.json"));
    EXPECT_EQ(manifest["inputs"].size(), 2u);
    EXPECT_TRUE(manifest["seeds"].contains("subsample"));
}

// ---------------------------------------------------------------- profile

TEST(CliProfile, WritesTables) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(20, 1));
    const auto r = run_cli(dir, {"profile", "--corpus", corpus.string(), "--families", "readability,sentiment", "--out",
                                 (dir / "out").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto csv_text = test::read_file(dir / "out/characteristics.csv");
    EXPECT_EQ(count_lines(csv_text), 1u + 5u + 6u);
    EXPECT_NE(test::read_file(dir / "out/characteristics.md").find("Gunning Fog Index"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "out/corpus_stats.json"));
}

TEST(CliProfile, Errors) {
    test::TempDir dir;
    EXPECT_EQ(run_cli(dir, {"profile", "--corpus", (dir / "none.jsonl").string(), "--out", (dir / "o").string()}).rc, 1);
    const auto corpus = write_corpus(dir, test::separable_corpus(5, 1));
    EXPECT_EQ(run_cli(dir, {"profile", "--corpus", corpus.string(), "--families", "astrology"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"profile"}).rc, 2);
}

// ---------------------------------------------------------------- train / eval

TEST(CliEval, TwoModels) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(30, 2));
    const auto r = run_cli(dir, {"eval", "--corpus", corpus.string(), "--models", "lr,svm", "--folds", "5", "--seed", "7",
                                 "--out", (dir / "out").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto manifest = nlohmann::json::parse(test::read_file(dir / "out/eval_manifest.json"));
    ASSERT_EQ(manifest.size(), 2u);
    EXPECT_EQ(manifest[0]["model"], "lr");
    EXPECT_EQ(manifest[1]["model"], "svm");
    const auto run = nlohmann::json::parse(test::read_file(dir / "out/run_manifest.json"));
    EXPECT_EQ(run["seeds"]["root"], 7);
    EXPECT_EQ(run["seeds"]["model.svm"], 7);
    EXPECT_EQ(run["inputs"][0]["sha256"], sha256_file(corpus));
}

TEST(CliEval, AllModelsOnSeparableCorpus) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(40, 3));
    const auto r = run_cli(dir, {"eval", "--corpus", corpus.string(), "--models", "all", "--save-models", "--out",
                                 (dir / "out").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    std::istringstream report_in(test::read_file(dir / "out/eval_report.csv"));
    csv::Reader reader(report_in);
    std::vector<std::string> row;
    reader.next(row);
    std::set<std::string> models;
    while (reader.next(row)) {
        models.insert(row[0]);
        EXPECT_EQ(row[4], "1.000000") << row[0] << " " << row[2];
        EXPECT_TRUE(row[12].empty());
    }
    EXPECT_EQ(models.size(), 8u);
    for (auto k : kAllModelKinds) {
        const auto path = dir / "out/models" / (std::string(to_string(k)) + ".json");
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(load_model(path).model.kind, k);
    }
}

TEST(CliEval, SameSeedSameReports) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(30, 4));
    for (auto sub : {"a", "b"})
        ASSERT_EQ(run_cli(dir, {"eval", "--corpus", corpus.string(), "--models", "lr,rf,mlp", "--seed", "11", "--out",
                                (dir / sub).string()})
                      .rc,
                  0);
    for (auto f : {"eval_report.csv", "eval_report.md", "eval_predictions.csv", "eval_manifest.json"})
        EXPECT_EQ(test::read_file(dir / "a" / f), test::read_file(dir / "b" / f)) << f;
}

TEST(CliEval, RerunManifestDiffersOnlyInTimestamps) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(20, 5));
    const std::vector<std::string> args = {"eval", "--corpus", corpus.string(), "--models", "lr", "--out", (dir / "o").string()};
    ASSERT_EQ(run_cli(dir, args).rc, 0);
    const auto first = nlohmann::json::parse(test::read_file(dir / "o/run_manifest.json"));
    const auto csv1 = test::read_file(dir / "o/eval_report.csv");
    ASSERT_EQ(run_cli(dir, args).rc, 0);
    const auto second = nlohmann::json::parse(test::read_file(dir / "o/run_manifest.json"));
    EXPECT_EQ(without_timestamps(first), without_timestamps(second));
    EXPECT_EQ(csv1, test::read_file(dir / "o/eval_report.csv"));
}

TEST(CliEval, ConfigFileUnderFlags) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(20, 6));
    const auto cfg = dir.write("run.toml", "[eval]\nmodels = \"lr,mnb\"\nfolds = 3\nseed = 9\n");
    auto r = run_cli(dir, {"--config", cfg.string(), "eval", "--corpus", corpus.string(), "--out", (dir / "a").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    auto manifest = nlohmann::json::parse(test::read_file(dir / "a/eval_manifest.json"));
    EXPECT_EQ(manifest.size(), 2u);
    EXPECT_EQ(manifest[0]["split"]["n_folds"], 3);
    auto run = nlohmann::json::parse(test::read_file(dir / "a/run_manifest.json"));
    EXPECT_EQ(run["seeds"]["root"], 9);
    EXPECT_EQ(run["config_sha256"], sha256_file(cfg));

    r = run_cli(dir, {"--config", cfg.string(), "eval", "--corpus", corpus.string(), "--models", "svm", "--seed", "3",
                      "--out", (dir / "b").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    manifest = nlohmann::json::parse(test::read_file(dir / "b/eval_manifest.json"));
    ASSERT_EQ(manifest.size(), 1u);
    EXPECT_EQ(manifest[0]["model"], "svm");
    EXPECT_EQ(manifest[0]["split"]["n_folds"], 3);
    run = nlohmann::json::parse(test::read_file(dir / "b/run_manifest.json"));
    EXPECT_EQ(run["seeds"]["root"], 3);
}

TEST(CliEval, Errors) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(20, 7));
    EXPECT_EQ(run_cli(dir, {"eval", "--corpus", corpus.string(), "--models", "gpt"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"eval", "--corpus", corpus.string(), "--folds", "0"}).rc, 2);
    Corpus one;
    for (int i = 0; i < 10; ++i) one.documents.push_back({"h" + std::to_string(i), "some words here", Label::Human, ""});
    const auto single = write_corpus(dir, one, "single.jsonl");
    const auto r = run_cli(dir, {"eval", "--corpus", single.string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(CliTrain, WritesModelsAndTestScores) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(30, 8));
    const auto r = run_cli(dir, {"train", "--corpus", corpus.string(), "--models", "lr,mnb", "--out", (dir / "out").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto loaded = load_model(dir / "out/models/lr.json");
    ASSERT_TRUE(loaded.tfidf.has_value());
    EXPECT_EQ(loaded.model.feature_dim, loaded.tfidf->dim());
    const auto csv_text = test::read_file(dir / "out/eval_report.csv");
    EXPECT_EQ(csv_text.find(",fold"), std::string::npos);
    EXPECT_NE(csv_text.find(",test,"), std::string::npos);
}

// ---------------------------------------------------------------- rephrase

TEST(CliRephrase, EchoAcceptedDisjointRejected) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(6, 9));
    ::setenv("MGTD_API_KEY", "cli-test-key", 1);
    {
        RunningMock m({mock::Mode::Echo});
        const auto r = run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--base-url", m.url(), "--out",
                                     (dir / "echo").string()});
        ASSERT_EQ(r.rc, 0) << r.err;
        EXPECT_NE(r.out.find("accepted 6, rejected 0, failed 0"), std::string::npos) << r.out;
        const auto out = read_corpus_jsonl(dir / "echo/rephrased.jsonl");
        EXPECT_EQ(out.count(Label::Machine), 6u);
    }
    {
        RunningMock m({mock::Mode::Disjoint});
        const auto r = run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--base-url", m.url(), "--max-attempts", "2",
                                     "--out", (dir / "disjoint").string()});
        ASSERT_EQ(r.rc, 0) << r.err;
        EXPECT_NE(r.out.find("accepted 0, rejected 6"), std::string::npos) << r.out;
        EXPECT_EQ(m.server.requests(), 12u);
        EXPECT_EQ(count_lines(test::read_file(dir / "disjoint/rephrase_audit.jsonl")), 12u);
    }
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path()))
        if (e.is_regular_file()) EXPECT_EQ(test::read_file(e.path()).find("cli-test-key"), std::string::npos) << e.path();
}

TEST(CliRephrase, ThresholdMonotone) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(15, 10));
    ::setenv("MGTD_API_KEY", "k", 1);
    std::set<std::string> accepted[2];
    const double thresholds[2] = {0.0, 0.6};
    for (int i = 0; i < 2; ++i) {
        RunningMock m({mock::Mode::Varying});
        const auto out = dir / ("t" + std::to_string(i));
        const auto r = run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--base-url", m.url(), "--threshold",
                                     std::to_string(thresholds[i]), "--max-attempts", "1", "--in-flight", "1", "--out",
                                     out.string()});
        ASSERT_EQ(r.rc, 0) << r.err;
        for (const auto& d : read_corpus_jsonl(out / "rephrased.jsonl").documents)
            if (d.label == Label::Machine) accepted[i].insert(d.id);
    }
    EXPECT_EQ(accepted[0].size(), 15u);
    EXPECT_LT(accepted[1].size(), accepted[0].size());
    for (const auto& id : accepted[1]) EXPECT_TRUE(accepted[0].count(id)) << id;
}

TEST(CliRephrase, Errors) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(3, 11));
    EXPECT_EQ(run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--threshold", "1.5"}).rc, 2);
    EXPECT_EQ(run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--template", "limerick"}).rc, 2);
    ::unsetenv("MGTD_API_KEY");
    auto r = run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--out", (dir / "o").string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.err.find("AuthFailure"), std::string::npos) << r.err;

    ::setenv("MGTD_API_KEY", "k", 1);
    int port;
    {
        RunningMock m({mock::Mode::Echo});
        port = m.port;
    }
    r = run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--base-url",
                      "http://127.0.0.1:" + std::to_string(port) + "/v1", "--timeout", "2", "--out", (dir / "o2").string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.err.find("EndpointUnreachable"), std::string::npos) << r.err;
    EXPECT_NE(r.out.find("failed 3"), std::string::npos) << r.out;
}

TEST(CliRephrase, BaseUrlFromEnvironment) {
    test::TempDir dir;
    const auto corpus = write_corpus(dir, test::separable_corpus(2, 12));
    RunningMock m({mock::Mode::Echo});
    ::setenv("MGTD_API_KEY", "k", 1);
    ::setenv("MGTD_BASE_URL", m.url().c_str(), 1);
    const auto r = run_cli(dir, {"rephrase", "--corpus", corpus.string(), "--out", (dir / "o").string()});
    ::unsetenv("MGTD_BASE_URL");
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(m.server.requests(), 2u);
}

// ---------------------------------------------------------------- robustness

TEST(CliRobustness, WritesPairedTables) {
    test::TempDir dir;
    const auto original = test::separable_corpus(20, 13, {"fifa", "got"});
    const auto p = write_corpus(dir, original);
    const auto r = run_cli(dir, {"robustness", "--original", p.string(), "--rephrased", p.string(), "--models", "lr", "--out",
                                 (dir / "out").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto md = test::read_file(dir / "out/robustness.md");
    EXPECT_NE(md.find("## Change"), std::string::npos);
    EXPECT_NE(md.find("| got |"), std::string::npos);
    EXPECT_NE(md.find("| LR | +0.00"), std::string::npos) << md;
}

// ---------------------------------------------------------------- assets

TEST(CliAssets, VerifyPristineAndCorrupted) {
    test::TempDir dir;
    auto r = run_cli(dir, {"verify-assets", "--out", (dir / "o").string()});
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "o/asset_report.json"));

    std::filesystem::copy(asset_dir(), dir / "assets", std::filesystem::copy_options::recursive);
    std::ofstream(dir / "assets/stopwords_en.txt", std::ios::app) << "extra\n";
    r = run_cli(dir, {"verify-assets", "--assets", (dir / "assets").string(), "--out", (dir / "o2").string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.err.find("ChecksumMismatch"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("stopwords_en"), std::string::npos) << r.err;
}

TEST(CliAssets, FetchFromLocalMirror) {
    httplib::Server files;
    files.set_mount_point("/mirror", kFixtures.string());
    const int port = files.bind_to_any_port("127.0.0.1");
    std::thread t([&] { files.listen_after_bind(); });
    files.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port) + "/mirror";

    test::TempDir dir;
    const std::vector<std::string> args = {"fetch-datasets", "--variants", "webtext,xl-1542M", "--splits", "test",
                                           "--gpt2-url", base, "--wiki-url", base + "/GPT-wiki-intro.csv.zip",
                                           "--out", (dir / "data").string()};
    auto r = run_cli(dir, args);
    EXPECT_EQ(r.rc, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "data/gpt2-output/xl-1542M.test.jsonl"));
    EXPECT_TRUE(std::filesystem::exists(dir / "data/wiki-intro/GPT-wiki-intro.csv"));
    EXPECT_NE(r.out.find("not publicly reconstructable"), std::string::npos);
    r = run_cli(dir, args);
    EXPECT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(count_lines(r.out.substr(0, r.out.find("pubmed"))), 4u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(r.out.begin(), r.out.end(), '(')), 4u) << r.out;

    files.stop();
    t.join();
    r = run_cli(dir, {"fetch-datasets", "--datasets", "wiki-intro", "--wiki-url", base + "/x.zip", "--out",
                      (dir / "fresh").string()});
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.err.find("DownloadFailed"), std::string::npos) << r.err;
}
