#pragma once

#include <cmath>
#include <string_view>

#include "mgtd/error.hpp"
#include "mgtd/textstats.hpp"

namespace mgtd {

struct ReadabilityScores {
    double gunning_fog = 0.0;
    double smog = 0.0;
    double dale_chall = 0.0;
    double flesch_reading_ease = 0.0;
    double coleman_liau = 0.0;
};

namespace detail {
inline void require_words(const TextCounts& c) {
    if (c.words == 0) throw Error(ErrorCode::ZeroWords, "text has no words");
}
inline void require_sentences(const TextCounts& c) {
    if (c.sentences == 0) throw Error(ErrorCode::ZeroSentences, "text has no sentences");
}
inline double ratio(std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(b); }
} // namespace detail

/// 0.4 * (words/sentences + 100 * complex/words)
inline double gunning_fog(const TextCounts& c) {
    detail::require_words(c);
    detail::require_sentences(c);
    return 0.4 * (detail::ratio(c.words, c.sentences) + 100.0 * detail::ratio(c.complex_words, c.words));
}

/// 1.0430 * sqrt(polysyllables * 30 / sentences) + 3.1291, with no
/// minimum-sentence guard.
inline double smog(const TextCounts& c) {
    detail::require_sentences(c);
    return 1.0430 * std::sqrt(static_cast<double>(c.complex_words) * 30.0 / static_cast<double>(c.sentences)) + 3.1291;
}

/// 0.1579 * pct_difficult + 0.0496 * words/sentences, plus 3.6365 when
/// more than 5% of words are difficult.
inline double dale_chall(const TextCounts& c) {
    detail::require_words(c);
    detail::require_sentences(c);
    const double difficult = detail::ratio(c.difficult_words, c.words);
    double score = 0.1579 * (100.0 * difficult) + 0.0496 * detail::ratio(c.words, c.sentences);
    if (difficult > 0.05) score += 3.6365;
    return score;
}

/// 206.835 - 1.015 * words/sentences - 84.6 * syllables/words
inline double flesch_reading_ease(const TextCounts& c) {
    detail::require_words(c);
    detail::require_sentences(c);
    return 206.835 - 1.015 * detail::ratio(c.words, c.sentences) - 84.6 * detail::ratio(c.syllables, c.words);
}

/// 0.0588 * L - 0.296 * S - 15.8 with L, S letters and sentences per 100 words.
inline double coleman_liau(const TextCounts& c) {
    detail::require_words(c);
    const double L = 100.0 * detail::ratio(c.letters, c.words);
    const double S = 100.0 * detail::ratio(c.sentences, c.words);
    return 0.0588 * L - 0.296 * S - 15.8;
}

inline ReadabilityScores readability(const TextCounts& c) {
    return {gunning_fog(c), smog(c), dale_chall(c), flesch_reading_ease(c), coleman_liau(c)};
}

inline ReadabilityScores readability(std::string_view text) { return readability(text_counts(text)); }

} // namespace mgtd
