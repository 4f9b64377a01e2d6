#pragma once

// Tokenization, sentence segmentation, syllable counting and the word-level
// counts the readability formulas consume.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mgtd/asset_store.hpp"
#include "mgtd/unicode.hpp"

namespace mgtd {

struct TextCounts {
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t letters = 0;
    std::size_t syllables = 0;
    std::size_t complex_words = 0;
    std::size_t difficult_words = 0;

    bool operator==(const TextCounts&) const = default;
};

namespace detail {

inline bool is_ascii(std::string_view s) {
    for (unsigned char c : s)
        if (c >= 0x80) return false;
    return true;
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline std::string lower(std::string_view s) {
    return is_ascii(s) ? ascii_lower(s) : unicode::to_lower(s);
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Strips non-alphanumeric code points from both ends.
inline std::string_view strip_edges(std::string_view tok) {
    std::size_t begin = tok.size(), end = 0;
    unicode::for_each_code_point(tok, [&](unicode::CodePoint c, std::size_t off, std::size_t len) {
        if (unicode::is_alnum(c)) {
            if (begin == tok.size()) begin = off;
            end = off + len;
        }
    });
    if (begin >= end) return {};
    return tok.substr(begin, end - begin);
}

template <typename Fn>
void for_each_whitespace_field(std::string_view text, Fn&& fn) {
    std::size_t field_start = std::string_view::npos;
    unicode::for_each_code_point(text, [&](unicode::CodePoint c, std::size_t off, std::size_t) {
        if (unicode::is_space(c)) {
            if (field_start != std::string_view::npos) {
                fn(text.substr(field_start, off - field_start));
                field_start = std::string_view::npos;
            }
        } else if (field_start == std::string_view::npos) {
            field_start = off;
        }
    });
    if (field_start != std::string_view::npos) fn(text.substr(field_start));
}

inline bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// Vowel-group count for a single hyphen-free piece; 0 when it has no letters.
inline std::size_t syllables_in_piece(std::string_view piece) {
    std::string w;
    bool has_letter = false;
    unicode::for_each_code_point(piece, [&](unicode::CodePoint c, std::size_t off, std::size_t len) {
        if (!unicode::is_letter(c)) return;
        has_letter = true;
        if (c < 0x80) {
            w += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
        } else {
            w += '#';  // non-ASCII letters count as consonants
        }
        (void)off;
        (void)len;
    });
    if (!has_letter) return 0;

    std::size_t runs = 0;
    bool prev = false;
    for (char c : w) {
        const bool v = is_vowel(c);
        if (v && !prev) ++runs;
        prev = v;
    }
    std::size_t n = runs;
    const std::size_t len = w.size();
    // Silent terminal 'e': a lone final e after a consonant, except "-le"
    // after a consonant ("table").
    if (len >= 2 && w[len - 1] == 'e' && !is_vowel(w[len - 2]) && runs > 1) {
        const bool consonant_le = w[len - 2] == 'l' && len >= 3 && !is_vowel(w[len - 3]);
        if (!consonant_le) --n;
    }
    return n < 1 ? 1 : n;
}

} // namespace detail

/// Whitespace split with punctuation stripped from token edges. Internal
/// apostrophes and hyphens survive.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    detail::for_each_whitespace_field(text, [&](std::string_view field) {
        auto tok = detail::strip_edges(field);
        if (!tok.empty()) tokens.emplace_back(tok);
    });
    return tokens;
}

/// Splits after runs of . ! ? that are followed by whitespace or the end of
/// text. A single period closing a known abbreviation does not split.
inline std::vector<std::string> split_sentences(std::string_view text, const WordSet& abbreviations) {
    std::vector<std::string> sentences;
    auto push = [&](std::string_view piece) {
        auto s = trim(piece);
        if (!s.empty()) sentences.push_back(std::move(s));
    };
    const auto is_term = [](char c) { return c == '.' || c == '!' || c == '?'; };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_term(text[i])) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end < text.size() && is_term(text[run_end])) ++run_end;
        const bool at_boundary = run_end == text.size() || text[run_end] == ' ' || text[run_end] == '\t' ||
                                 text[run_end] == '\n' || text[run_end] == '\r';
        if (!at_boundary) {
            i = run_end;
            continue;
        }
        bool abbreviation = false;
        if (run_end - i == 1 && text[i] == '.') {
            std::size_t w = i;
            while (w > start && text[w - 1] != ' ' && text[w - 1] != '\t' && text[w - 1] != '\n' &&
                   text[w - 1] != '\r')
                --w;
            std::string word = detail::lower(text.substr(w, run_end - w));
            while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'' ||
                                     word.front() == '['))
                word.erase(word.begin());
            abbreviation = abbreviations.contains(word);
        }
        if (!abbreviation) {
            push(text.substr(start, run_end - start));
            start = run_end;
        }
        i = run_end;
    }
    if (start < text.size()) push(text.substr(start));
    return sentences;
}

inline std::vector<std::string> split_sentences(std::string_view text) {
    return split_sentences(text, abbreviations_en());
}

/// Vowel-group heuristic: maximal runs of a,e,i,o,u,y minus a silent final
/// 'e'; hyphenated compounds sum their parts; never below 1.
inline std::size_t count_syllables(std::string_view word) {
    std::size_t total = 0;
    std::size_t from = 0;
    while (from <= word.size()) {
        const auto dash = word.find('-', from);
        const auto piece = word.substr(from, dash == std::string_view::npos ? std::string_view::npos : dash - from);
        total += detail::syllables_in_piece(piece);
        if (dash == std::string_view::npos) break;
        from = dash + 1;
    }
    return total < 1 ? 1 : total;
}

/// Gunning-style complex word: three or more syllables, unless the word is a
/// hyphenated compound of short parts or only reaches three syllables
/// through an -es / -ed / -ing ending.
inline bool is_complex_word(std::string_view token) {
    const std::string w = detail::lower(token);
    if (count_syllables(w) < 3) return false;
    if (w.find('-') != std::string::npos) {
        bool any_long = false;
        std::size_t from = 0;
        while (from <= w.size()) {
            const auto dash = w.find('-', from);
            const auto part = std::string_view(w).substr(from, dash == std::string::npos ? std::string::npos : dash - from);
            if (!part.empty() && count_syllables(part) >= 3) any_long = true;
            if (dash == std::string::npos) break;
            from = dash + 1;
        }
        if (!any_long) return false;
    }
    for (std::string_view suffix : {"ing", "es", "ed"}) {
        if (detail::ends_with(w, suffix) && w.size() > suffix.size() + 1) {
            if (count_syllables(std::string_view(w).substr(0, w.size() - suffix.size())) < 3) return false;
        }
    }
    return true;
}

/// Case-insensitive lookup with plural / -ed / -ing fallbacks. Tokens
/// without letters (numbers) are treated as familiar.
inline bool is_familiar_word(std::string_view token, const WordSet& familiar) {
    bool has_letter = false;
    unicode::for_each_code_point(token, [&](unicode::CodePoint c, std::size_t, std::size_t) {
        if (unicode::is_letter(c)) has_letter = true;
    });
    if (!has_letter) return true;
    const std::string w = detail::lower(token);
    if (familiar.contains(w)) return true;
    auto has = [&](std::string_view stem) { return !stem.empty() && familiar.contains(std::string(stem)); };
    const std::string_view v(w);
    if (detail::ends_with(v, "ies") && has(std::string(v.substr(0, v.size() - 3)) + "y")) return true;
    if (detail::ends_with(v, "es") && has(v.substr(0, v.size() - 2))) return true;
    if (detail::ends_with(v, "s") && has(v.substr(0, v.size() - 1))) return true;
    if (detail::ends_with(v, "ied") && has(std::string(v.substr(0, v.size() - 3)) + "y")) return true;
    if (detail::ends_with(v, "ed") && (has(v.substr(0, v.size() - 2)) || has(v.substr(0, v.size() - 1))))
        return true;
    if (detail::ends_with(v, "ing") &&
        (has(v.substr(0, v.size() - 3)) || has(std::string(v.substr(0, v.size() - 3)) + "e")))
        return true;
    return false;
}

inline TextCounts text_counts(std::string_view text, const WordSet& familiar_words, const WordSet& abbreviations) {
    TextCounts c;
    const auto tokens = tokenize(text);
    c.words = tokens.size();
    c.sentences = split_sentences(text, abbreviations).size();
    for (const auto& tok : tokens) {
        unicode::for_each_code_point(tok, [&](unicode::CodePoint cp, std::size_t, std::size_t) {
            if (unicode::is_letter(cp)) ++c.letters;
        });
        c.syllables += count_syllables(tok);
        if (is_complex_word(tok)) ++c.complex_words;
        if (!is_familiar_word(tok, familiar_words)) ++c.difficult_words;
    }
    return c;
}

inline TextCounts text_counts(std::string_view text, const WordSet& familiar_words) {
    return text_counts(text, familiar_words, abbreviations_en());
}

inline TextCounts text_counts(std::string_view text) {
    return text_counts(text, dale_chall_familiar_words(), abbreviations_en());
}

} // namespace mgtd
