#pragma once

// Per-run record written next to every command's outputs.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgtd/eval.hpp"
#include "mgtd/sha256.hpp"

#ifndef MGTD_VERSION
#define MGTD_VERSION "0.0.0"
#endif

namespace mgtd {

inline constexpr const char* kRunManifestFile = "run_manifest.json";

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string version = MGTD_VERSION;
    std::string command;
    std::vector<std::string> argv;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
    std::optional<std::string> config_path;
    std::optional<std::string> config_sha256;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
    nlohmann::ordered_json settings = nlohmann::ordered_json::object();
    std::string started_at = utc_timestamp();
    std::string finished_at;
    std::string status = "ok";
    std::optional<std::string> error;

    void add_input(const std::filesystem::path& p) { inputs.emplace_back(p.string(), sha256_file(p)); }

    void set_config(const std::filesystem::path& p) {
        config_path = p.string();
        config_sha256 = sha256_file(p);
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["toolkit_version"] = version;
        j["command"] = command;
        j["argv"] = argv;
        j["seeds"] = seeds;
        j["config_file"] = config_path ? nlohmann::ordered_json(*config_path) : nlohmann::ordered_json(nullptr);
        j["config_sha256"] = config_sha256 ? nlohmann::ordered_json(*config_sha256) : nlohmann::ordered_json(nullptr);
        j["inputs"] = nlohmann::ordered_json::array();
        for (const auto& [path, sha] : inputs) j["inputs"].push_back({{"path", path}, {"sha256", sha}});
        j["settings"] = settings;
        j["started_at"] = started_at;
        j["finished_at"] = finished_at;
        j["status"] = status;
        if (error) j["error"] = *error;
        return j;
    }

    void write(const std::filesystem::path& dir) {
        if (finished_at.empty()) finished_at = utc_timestamp();
        write_text_file(dir / kRunManifestFile, to_json().dump(2) + "\n");
    }
};

} // namespace mgtd
