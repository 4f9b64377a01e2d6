#pragma once

#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <string>

#include <unistd.h>

#include "mgtd/corpus.hpp"
#include "mgtd/rng.hpp"

namespace mgtd::test {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("mgtd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

    std::filesystem::path write(const std::string& name, const std::string& content) const {
        const auto p = path_ / name;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string random_word(Engine& eng, std::size_t min_len = 1, std::size_t max_len = 10) {
    static constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyz";
    const auto len = min_len + uniform_index(eng, max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += letters[uniform_index(eng, letters.size())];
    return w;
}

/// Compares against tests/golden/<name>; MGTD_UPDATE_GOLDEN=1 rewrites the file.
inline std::string golden(const std::string& name, const std::string& actual) {
    const auto path = std::filesystem::path(MGTD_TEST_DIR) / "golden" / name;
    if (const char* u = std::getenv("MGTD_UPDATE_GOLDEN"); u && std::string(u) == "1") {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream(path, std::ios::binary) << actual;
    }
    return read_file(path);
}

inline const std::vector<std::string>& human_vocab() {
    static const std::vector<std::string> v = {"river", "stone", "forest", "quiet", "ancient", "valley", "harbor",
                                               "meadow", "lantern", "orchard", "granite", "willow"};
    return v;
}

inline const std::vector<std::string>& machine_vocab() {
    static const std::vector<std::string> v = {"innovative", "platform", "seamless", "solution", "leverage",
                                               "dynamic", "synergy", "empower", "robust", "scalable",
                                               "holistic", "paradigm"};
    return v;
}

inline const std::vector<std::string>& shared_vocab() {
    static const std::vector<std::string> v = {"the", "a", "of", "and", "people", "time", "day", "world"};
    return v;
}

/// Balanced corpus whose classes use disjoint content words; every document
/// opens with its class's first word. Sources cycle through `topics`.
inline Corpus separable_corpus(std::size_t per_class, std::uint64_t seed,
                               const std::vector<std::string>& topics = {"general"}) {
    Corpus c;
    Engine eng(seed);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = static_cast<int>(i % 2);
        const auto& own = label ? machine_vocab() : human_vocab();
        std::string text = own.front();
        for (int s = 0; s < 2; ++s) {
            for (int w = 0; w < 6; ++w) {
                const auto& pool = w % 3 == 2 ? shared_vocab() : own;
                if (!text.empty() && text.back() != ' ') text += ' ';
                text += pool[uniform_index(eng, pool.size())];
            }
            text += ". ";
        }
        text.pop_back();
        char id[32];
        std::snprintf(id, sizeof id, "d%05zu", i);
        c.documents.push_back({id, text, label ? Label::Machine : Label::Human, topics[(i / 2) % topics.size()]});
    }
    return c;
}

} // namespace mgtd::test
