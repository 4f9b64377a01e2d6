#pragma once

// Location of the bundled data files and cached read-only access to the
// word lists the text modules need.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "mgtd/error.hpp"

#ifndef MGTD_DEFAULT_ASSET_DIR
#define MGTD_DEFAULT_ASSET_DIR "assets"
#endif

namespace mgtd {

using WordSet = std::unordered_set<std::string>;

/// MGTD_ASSET_DIR overrides the compiled-in location.
inline std::filesystem::path asset_dir() {
    if (const char* env = std::getenv("MGTD_ASSET_DIR"); env && *env) return env;
    return MGTD_DEFAULT_ASSET_DIR;
}

inline std::string trim(std::string_view s) {
    const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_ws(s[b])) ++b;
    while (e > b && is_ws(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

/// One entry per line; blank lines and '#' comments skipped.
inline std::vector<std::string> read_word_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingAsset, "cannot open " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto w = trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.push_back(std::move(w));
    }
    return words;
}

namespace detail {
inline const WordSet& cached_word_set(const std::filesystem::path& path) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const WordSet>> cache;
    std::lock_guard lock(mu);
    auto key = std::filesystem::absolute(path).lexically_normal().string();
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto words = read_word_list(path);
        auto set = std::make_shared<const WordSet>(words.begin(), words.end());
        it = cache.emplace(key, std::move(set)).first;
    }
    return *it->second;
}
} // namespace detail

inline const WordSet& stopwords_en() {
    return detail::cached_word_set(asset_dir() / "stopwords_en.txt");
}

inline const WordSet& abbreviations_en() {
    return detail::cached_word_set(asset_dir() / "abbreviations_en.txt");
}

inline const WordSet& dale_chall_familiar_words() {
    return detail::cached_word_set(asset_dir() / "dale_chall_easy_words.txt");
}

} // namespace mgtd
