#pragma once

// Thin ICU wrappers: UTF-8 code point iteration, classification, NFC and
// lowercasing.

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "mgtd/error.hpp"

namespace mgtd::unicode {

using CodePoint = UChar32;

inline constexpr CodePoint kReplacement = 0xFFFD;

/// Calls fn(code_point, byte_offset, byte_length) for each code point.
/// Ill-formed sequences are reported as U+FFFD.
template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
    const auto n = static_cast<std::int32_t>(s.size());
    std::int32_t i = 0;
    while (i < n) {
        const std::int32_t start = i;
        CodePoint c;
        U8_NEXT(p, i, n, c);
        if (c < 0) c = kReplacement;
        fn(c, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
    }
}

inline void append_utf8(std::string& out, CodePoint c) {
    char buf[U8_MAX_LENGTH];
    std::int32_t len = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<std::uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
    if (!error) out.append(buf, static_cast<std::size_t>(len));
}

inline bool is_letter(CodePoint c) { return u_isalpha(c) != 0; }
inline bool is_digit(CodePoint c) { return u_isdigit(c) != 0; }
inline bool is_alnum(CodePoint c) { return is_letter(c) || is_digit(c); }
inline bool is_space(CodePoint c) { return u_isUWhiteSpace(c) != 0; }
inline bool is_ascii_lower(CodePoint c) { return c >= 'a' && c <= 'z'; }

inline std::string nfc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error(ErrorCode::Io, "ICU NFC normalizer unavailable");
    const auto in = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
    icu::UnicodeString out = norm->normalize(in, status);
    if (U_FAILURE(status)) throw Error(ErrorCode::Io, "NFC normalization failed");
    std::string result;
    out.toUTF8String(result);
    return result;
}

inline std::string to_lower(std::string_view s) {
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
    u.toLower(icu::Locale::getRoot());
    std::string result;
    u.toUTF8String(result);
    return result;
}

} // namespace mgtd::unicode
