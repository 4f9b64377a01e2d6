#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "mgtd/rng.hpp"
#include "mgtd/textstats.hpp"

using namespace mgtd;

namespace {

std::string random_word(Engine& eng, std::size_t min_len = 1, std::size_t max_len = 10) {
    static constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyz";
    const auto len = min_len + uniform_index(eng, max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += letters[uniform_index(eng, letters.size())];
    return w;
}

} // namespace

TEST(Tokenize, StripsEdgePunctuation) {
    EXPECT_EQ(tokenize("hello, world!"), (std::vector<std::string>{"hello", "world"}));
}

TEST(Tokenize, KeepsInternalApostrophesAndHyphens) {
    EXPECT_EQ(tokenize("state-of-the-art isn't"), (std::vector<std::string>{"state-of-the-art", "isn't"}));
}

TEST(Tokenize, EmptyText) {
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize("  ... ! ").empty());
}

TEST(Tokenize, NonAsciiWhitespaceAndLetters) {
    EXPECT_EQ(tokenize("caf\xC3\xA9\xC2\xA0na\xC3\xAFve."), (std::vector<std::string>{"caf\xC3\xA9", "na\xC3\xAFve"}));
}

TEST(SplitSentences, Basic) {
    EXPECT_EQ(split_sentences("A b. C d!"), (std::vector<std::string>{"A b.", "C d!"}));
}

TEST(SplitSentences, AbbreviationDoesNotSplit) {
    EXPECT_EQ(split_sentences("See Dr. Smith today.").size(), 1u);
    EXPECT_EQ(split_sentences("Apples vs. oranges, e.g. here. Done?").size(), 2u);
}

TEST(SplitSentences, NoTerminator) {
    EXPECT_EQ(split_sentences("no terminator"), (std::vector<std::string>{"no terminator"}));
    EXPECT_TRUE(split_sentences("").empty());
    EXPECT_TRUE(split_sentences("   ").empty());
}

TEST(SplitSentences, TerminatorRunsAndInternalPeriods) {
    EXPECT_EQ(split_sentences("What?! Really... yes").size(), 3u);
    EXPECT_EQ(split_sentences("Version 3.14 is out.").size(), 1u);
}

TEST(Syllables, Examples) {
    EXPECT_EQ(count_syllables("cat"), 1u);
    EXPECT_EQ(count_syllables("readability"), 5u);
    EXPECT_EQ(count_syllables("table"), 2u);
    EXPECT_EQ(count_syllables("state-of-the-art"), 4u);
    EXPECT_EQ(count_syllables("2020"), 1u);
}

TEST(Syllables, HandVerifiedFixture) {
    std::ifstream in(std::string(MGTD_DEFAULT_ASSET_DIR) + "/fixtures/syllables.tsv");
    ASSERT_TRUE(in);
    std::string line;
    std::size_t checked = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        ASSERT_NE(tab, std::string::npos) << line;
        const auto word = line.substr(0, tab);
        const auto expected = std::stoul(line.substr(tab + 1));
        EXPECT_EQ(count_syllables(word), expected) << word;
        ++checked;
    }
    EXPECT_GE(checked, 50u);
}

TEST(Syllables, PropertyAtLeastOneAndMonotoneUnderSuffix) {
    Engine eng(7);
    const std::vector<std::string> suffixes = {"y", "ly", "a", "o", "ty", "ny", "ing", "ism"};
    for (int i = 0; i < 2000; ++i) {
        const auto w = random_word(eng);
        const auto base = count_syllables(w);
        EXPECT_GE(base, 1u) << w;
        const auto& s = suffixes[uniform_index(eng, suffixes.size())];
        EXPECT_GE(count_syllables(w + s), base) << w << "+" << s;
    }
    EXPECT_LE(count_syllables("cat"), count_syllables("catty"));
}

TEST(ComplexWords, Rules) {
    EXPECT_TRUE(is_complex_word("incomprehensible"));
    EXPECT_FALSE(is_complex_word("table"));
    // compound of short parts
    EXPECT_FALSE(is_complex_word("well-to-do-man"));
    EXPECT_TRUE(is_complex_word("anti-establishment"));
    // inflection of a two-syllable stem
    EXPECT_FALSE(is_complex_word("recorded"));
    EXPECT_FALSE(is_complex_word("reporting"));
    EXPECT_TRUE(is_complex_word("analyzing"));
}

TEST(FamiliarWords, StemFallback) {
    const WordSet fam{"cat", "jump", "bake", "city"};
    EXPECT_TRUE(is_familiar_word("Cats", fam));
    EXPECT_TRUE(is_familiar_word("jumped", fam));
    EXPECT_TRUE(is_familiar_word("jumping", fam));
    EXPECT_TRUE(is_familiar_word("baking", fam));
    EXPECT_TRUE(is_familiar_word("cities", fam));
    EXPECT_TRUE(is_familiar_word("42", fam));
    EXPECT_FALSE(is_familiar_word("dog", fam));
}

TEST(TextCounts, Examples) {
    const auto c = text_counts("The cat sat.", WordSet{"the", "cat", "sat"});
    EXPECT_EQ(c.words, 3u);
    EXPECT_EQ(c.sentences, 1u);
    EXPECT_EQ(c.difficult_words, 0u);
    EXPECT_EQ(c.letters, 9u);
    EXPECT_EQ(c.syllables, 3u);

    const auto d = text_counts("Incomprehensible.", WordSet{});
    EXPECT_EQ(d.complex_words, 1u);
    EXPECT_EQ(d.difficult_words, 1u);

    EXPECT_EQ(text_counts("", WordSet{}), TextCounts{});
}

TEST(TextCounts, PropertiesOnRandomTexts) {
    Engine eng(11);
    for (int i = 0; i < 300; ++i) {
        std::string a, b;
        const auto na = 1 + uniform_index(eng, 30), nb = 1 + uniform_index(eng, 30);
        for (std::size_t k = 0; k < na; ++k) a += random_word(eng) + (uniform_index(eng, 6) == 0 ? ". " : " ");
        for (std::size_t k = 0; k < nb; ++k) b += random_word(eng) + (uniform_index(eng, 6) == 0 ? "! " : " ");
        const auto ca = text_counts(a, WordSet{}), cb = text_counts(b, WordSet{});
        const auto cab = text_counts(a + " " + b, WordSet{});
        EXPECT_EQ(cab.words, ca.words + cb.words);
        EXPECT_GE(ca.sentences, 1u);
        EXPECT_GE(ca.words, ca.complex_words);
        EXPECT_GE(ca.syllables, ca.words);
    }
}

TEST(Tokenize, JoinRoundTripOnCleanTokens) {
    Engine eng(3);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> toks;
        const auto n = uniform_index(eng, 20);
        for (std::size_t k = 0; k < n; ++k) {
            auto w = random_word(eng, 1, 6);
            if (uniform_index(eng, 4) == 0) w += (uniform_index(eng, 2) ? "'" : "-") + random_word(eng, 1, 4);
            toks.push_back(w);
        }
        std::ostringstream joined;
        for (std::size_t k = 0; k < toks.size(); ++k) joined << (k ? " " : "") << toks[k];
        EXPECT_EQ(tokenize(joined.str()), toks);
    }
}
