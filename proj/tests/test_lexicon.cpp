#include <gtest/gtest.h>

#include <sstream>

#include "mgtd/lexicon.hpp"
#include "test_util.hpp"

using namespace mgtd;
using mgtd::test::TempDir;

namespace {

LexiconSet parse(const std::string& s) {
    std::istringstream in(s);
    return parse_lexicon(in, "inline");
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

LexiconGroup bias_toy() {
    return LexiconGroup("bias", {parse("maybe\thedges\nsort of\thedges\n"), parse("know\tfactives\n"),
                                 parse("claim\tassertives\n"), parse("manage\timplicatives\n"),
                                 parse("radical\tbias_words\n")});
}

} // namespace

TEST(LoadLexicon, TwoEntries) {
    TempDir dir;
    const auto lex = load_lexicon(dir.write("l.tsv", "good\tstrong_positive\nbad\tstrong_negative"));
    EXPECT_EQ(lex.size(), 2u);
    EXPECT_EQ(lex.categories.size(), 2u);
}

TEST(LoadLexicon, EmptyFileWarns) {
    const auto lex = parse("# only a comment\n\n");
    EXPECT_EQ(lex.size(), 0u);
    EXPECT_EQ(lex.warnings.size(), 1u);
}

TEST(LoadLexicon, Errors) {
    EXPECT_EQ(code_of([] { parse("no tab here\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse("a\tb\tc\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse("\tcat\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse("good\tpos\ngood\tneg\n"); }), ErrorCode::ConflictingDuplicate);
    EXPECT_NO_THROW(parse("good\tpos\nGood\tpos\n"));
    EXPECT_EQ(code_of([] { load_lexicon("/nonexistent.tsv"); }), ErrorCode::FileNotFound);
}

TEST(LoadLexicon, BundledMoralGroupHasTenCategories) {
    const auto& g = moral_lexicons();
    EXPECT_EQ(g.categories().size(), 10u);
    for (auto c : kMoralCategories) EXPECT_TRUE(g.has_category(c)) << c;
}

TEST(LoadLexicon, BundledGroupsCoverRequiredCategories) {
    for (auto c : kBiasCategories) EXPECT_TRUE(bias_lexicons().has_category(c)) << c;
    for (auto c : kSentimentCategories) EXPECT_TRUE(sentiment_lexicons().has_category(c)) << c;
    for (auto c : kOpinionCategories) EXPECT_TRUE(opinion_lexicons().has_category(c)) << c;
}

TEST(BiasFeatures, Examples) {
    const auto g = bias_toy();
    const auto v = bias_features({"maybe", "yes"}, g);
    EXPECT_DOUBLE_EQ(v["hedges"], 0.5);
    EXPECT_DOUBLE_EQ(v["factives"], 0.0);
    EXPECT_DOUBLE_EQ(v["assertives"], 0.0);
    for (const auto& [c, r] : bias_features({"x", "y", "z"}, g).rates) EXPECT_EQ(r, 0.0) << c;
}

TEST(BiasFeatures, MultiwordMatchedBeforeUnigrams) {
    const auto g = LexiconGroup("t", {parse("sort of\thedges\nsort\thedges\nof\thedges\n")});
    // "sort of" counts once; the remaining lone "of" counts once more
    const auto v = g.rates(std::vector<std::string>{"sort", "of", "a", "of"}, std::array<std::string_view, 1>{"hedges"});
    EXPECT_DOUBLE_EQ(v["hedges"], 0.5);
}

TEST(BiasFeatures, MissingCategory) {
    const auto g = LexiconGroup("t", {parse("maybe\thedges\n")});
    EXPECT_EQ(code_of([&] { bias_features({"maybe"}, g); }), ErrorCode::MissingCategory);
}

TEST(MoralFeatures, Examples) {
    std::vector<LexiconSet> sets;
    for (auto c : kMoralCategories) sets.push_back(parse(std::string(c == "harm" ? "kill" : "zz" + std::string(c)) + "\t" + std::string(c) + "\n"));
    const LexiconGroup g("moral", sets);
    EXPECT_DOUBLE_EQ(moral_features({"kill"}, g)["harm"], 1.0);
    for (const auto& [c, r] : moral_features({"a", "b"}, g).rates) EXPECT_EQ(r, 0.0);
}

TEST(MoralFeatures, WildcardStems) {
    const auto g = LexiconGroup("t", {parse("abus*\tharm\nwar\tharm\n")});
    const auto req = std::array<std::string_view, 1>{"harm"};
    EXPECT_DOUBLE_EQ(g.rates({"abused", "abuse", "abs"}, req)["harm"], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(g.rates({"war", "warm"}, req)["harm"], 0.5);
}

TEST(SentimentFeatures, Examples) {
    std::vector<LexiconSet> sets;
    sets.push_back(parse("great\tstrong_positive\n"));
    sets.push_back(parse("awful\tstrong_negative\n"));
    for (auto c : {"weak_negative", "weak_positive", "weak_neutral", "strong_neutral"})
        sets.push_back(parse(std::string("qq") + c + "\t" + c + "\n"));
    const LexiconGroup g("sentiment", sets);
    EXPECT_DOUBLE_EQ(sentiment_features({"great"}, g)["strong_positive"], 1.0);
    const auto v = sentiment_features({"great", "movie", "awful", "ending"}, g);
    EXPECT_DOUBLE_EQ(v["strong_positive"], 0.25);
    EXPECT_DOUBLE_EQ(v["strong_negative"], 0.25);
    for (const auto& [c, r] : sentiment_features({}, g).rates) EXPECT_EQ(r, 0.0);
}

TEST(LexiconProperties, DuplicationInvarianceBoundsAndOrder) {
    const auto& g = sentiment_lexicons();
    const auto words = tokenize(
        "the movie was great but the ending felt awful and sad though the acting was good fine superb "
        "terrible boring nice");
    Engine eng(4);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::string> toks;
        const auto n = 1 + uniform_index(eng, 40);
        for (std::size_t k = 0; k < n; ++k) toks.push_back(words[uniform_index(eng, words.size())]);
        const auto a = sentiment_features(toks, g);
        auto doubled = toks;
        doubled.insert(doubled.end(), toks.begin(), toks.end());
        const auto b = sentiment_features(doubled, g);
        auto shuffled = toks;
        shuffle(std::span<std::string>(shuffled), eng);
        const auto c = sentiment_features(shuffled, g);
        for (const auto& [cat, r] : a.rates) {
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0);
            EXPECT_NEAR(r, b[cat], 1e-15);
            EXPECT_NEAR(r, c[cat], 1e-15);
        }
    }
}

TEST(LexiconProperties, DisjointFamilyRatesSumAtMostOne) {
    const LexiconGroup g("t", {parse("a\tx\nb\tx\n"), parse("c\ty\nd\ty\n"), parse("e\tz\n")});
    Engine eng(8);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
    const auto req = std::array<std::string_view, 3>{"x", "y", "z"};
    for (int i = 0; i < 100; ++i) {
        std::vector<std::string> toks;
        const auto n = 1 + uniform_index(eng, 20);
        for (std::size_t k = 0; k < n; ++k) toks.push_back(vocab[uniform_index(eng, vocab.size())]);
        double sum = 0.0;
        for (const auto& [c, r] : g.rates(toks, req).rates) sum += r;
        EXPECT_LE(sum, 1.0 + 1e-12);
    }
}
