#pragma once

// Asset catalog (assets/MANIFEST.json), integrity checks and the downloader
// for the two public datasets.

#include <array>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "mgtd/asset_store.hpp"
#include "mgtd/corpus.hpp"
#include "mgtd/http.hpp"
#include "mgtd/lexicon.hpp"
#include "mgtd/sha256.hpp"

namespace mgtd {

struct AssetEntry {
    std::string id;
    std::string path;  // relative to the asset directory
    std::string sha256;
    std::size_t records = 0;
    std::string provenance;
};

struct DatasetSource {
    std::string id;
    std::string status;  // "public" or "not publicly reconstructable"
    std::string url;
    std::vector<std::string> variants;
    std::vector<std::string> splits;
    std::string note;

    bool is_public() const { return status == "public"; }
};

struct AssetCatalog {
    std::filesystem::path root;
    std::vector<AssetEntry> assets;
    std::vector<DatasetSource> datasets;

    const AssetEntry* find(std::string_view id) const {
        for (const auto& a : assets)
            if (a.id == id) return &a;
        return nullptr;
    }
    const DatasetSource* dataset(std::string_view id) const {
        for (const auto& d : datasets)
            if (d.id == id) return &d;
        return nullptr;
    }
};

inline constexpr int kAssetManifestVersion = 1;
inline constexpr std::size_t kMoralCategoryCount = 10;

inline AssetCatalog load_catalog(const std::filesystem::path& dir = asset_dir()) {
    const auto path = dir / "MANIFEST.json";
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingAsset, "asset manifest missing: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ChecksumMismatch, "asset manifest unreadable: " + std::string(e.what()));
    }
    if (j.value("format", "") != "mgtd-assets") throw Error(ErrorCode::ChecksumMismatch, "not an asset manifest");
    if (j.value("version", 0) != kAssetManifestVersion)
        throw Error(ErrorCode::VersionMismatch, "unsupported asset manifest version");
    AssetCatalog c;
    c.root = dir;
    for (const auto& a : j.at("assets"))
        c.assets.push_back({a.at("id"), a.at("path"), a.at("sha256"), a.at("records"), a.value("provenance", "")});
    for (const auto& d : j.value("datasets", nlohmann::json::array())) {
        DatasetSource s;
        s.id = d.at("id");
        s.status = d.at("status");
        s.url = d.value("url", "");
        s.variants = d.value("variants", std::vector<std::string>{});
        s.splits = d.value("splits", std::vector<std::string>{});
        s.note = d.value("note", "");
        c.datasets.push_back(std::move(s));
    }
    return c;
}

/// Non-blank lines that are not '#' comments.
inline std::size_t count_records(const std::filesystem::path& path) {
    return read_word_list(path).size();
}

struct AssetCheck {
    std::string id;
    std::string sha256;
    std::size_t records = 0;
};

struct AssetReport {
    std::vector<AssetCheck> checks;
    std::size_t moral_categories = 0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["status"] = "ok";
        j["assets"] = nlohmann::ordered_json::array();
        for (const auto& c : checks) j["assets"].push_back({{"id", c.id}, {"sha256", c.sha256}, {"records", c.records}});
        j["moral_categories"] = moral_categories;
        return j;
    }
};

/// Checks every catalogued file, in catalog order, and stops at the first
/// failure.
inline AssetReport verify_assets(const AssetCatalog& catalog) {
    AssetReport rep;
    for (const auto& a : catalog.assets) {
        const auto path = catalog.root / a.path;
        if (!std::filesystem::is_regular_file(path))
            throw Error(ErrorCode::MissingAsset, "asset " + a.id + " missing: " + path.string());
        const auto sha = sha256_file(path);
        if (sha != a.sha256)
            throw Error(ErrorCode::ChecksumMismatch, "asset " + a.id + " checksum " + sha + " != " + a.sha256);
        const auto n = count_records(path);
        if (n != a.records)
            throw Error(ErrorCode::ChecksumMismatch, "asset " + a.id + " has " + std::to_string(n) + " records, expected " +
                                                         std::to_string(a.records));
        rep.checks.push_back({a.id, sha, n});
    }
    const auto moral = load_lexicon_group(catalog.root / "lexicons" / "moral", "moral");
    rep.moral_categories = moral.categories().size();
    if (rep.moral_categories != kMoralCategoryCount)
        throw Error(ErrorCode::CategoryCountMismatch, "moral lexicon has " + std::to_string(rep.moral_categories) +
                                                          " categories, expected " + std::to_string(kMoralCategoryCount));
    return rep;
}

inline AssetReport verify_assets(const std::filesystem::path& dir = asset_dir()) {
    return verify_assets(load_catalog(dir));
}

// ------------------------------------------------------------ downloads

struct FetchOptions {
    std::vector<std::string> datasets = {"gpt2-output", "wiki-intro"};
    std::vector<std::string> gpt2_variants = {"webtext", "xl-1542M", "large-762M-k40"};
    std::vector<std::string> gpt2_splits = {"train", "valid", "test"};
    std::map<std::string, std::string> url_overrides;  // dataset id -> base URL
    int max_attempts = 3;
    double backoff_seconds = 1.0;
    int timeout_seconds = 60;
};

struct FetchedFile {
    std::string dataset;
    std::string file;  // relative to the target directory
    std::string url;
    std::string sha256;
    std::uintmax_t bytes = 0;
    bool cached = false;
};

struct FetchResult {
    std::vector<FetchedFile> files;
    std::vector<DatasetSource> unavailable;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["files"] = nlohmann::ordered_json::array();
        for (const auto& f : files)
            j["files"].push_back(
                {{"dataset", f.dataset}, {"file", f.file}, {"url", f.url}, {"sha256", f.sha256}, {"bytes", f.bytes}});
        j["unavailable"] = nlohmann::ordered_json::array();
        for (const auto& d : unavailable) j["unavailable"].push_back({{"id", d.id}, {"status", d.status}, {"note", d.note}});
        return j;
    }
};

inline constexpr const char* kDatasetRecordFile = "datasets.json";

namespace detail {

/// file -> sha256 from an earlier run's record.
inline std::map<std::string, std::string> read_fetch_record(const std::filesystem::path& target) {
    std::map<std::string, std::string> out;
    std::ifstream in(target / kDatasetRecordFile);
    if (!in) return out;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto& f : j.at("files")) out[f.at("file")] = f.at("sha256");
    } catch (const nlohmann::json::exception&) {
        out.clear();
    }
    return out;
}

inline bool cached_file_ok(const std::filesystem::path& path, const std::map<std::string, std::string>& record,
                           const std::string& rel) {
    const auto it = record.find(rel);
    return it != record.end() && std::filesystem::is_regular_file(path) && sha256_file(path) == it->second;
}

inline void download_file(const std::string& url, const std::filesystem::path& dest, const FetchOptions& opt) {
    const auto u = parse_url(url);
    const auto part = dest.string() + ".part";
    std::string last_error;
    for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
        if (attempt > 1)
            std::this_thread::sleep_for(std::chrono::duration<double>(opt.backoff_seconds * (1 << (attempt - 2))));
        std::ofstream out(part, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + part);
        httplib::Client cli(u.scheme_host_port);
        cli.set_follow_location(true);
        cli.set_connection_timeout(opt.timeout_seconds, 0);
        cli.set_read_timeout(opt.timeout_seconds, 0);
        int status = 0;
        auto res = cli.Get(
            u.path,
            [&](const httplib::Response& r) {
                status = r.status;
                return r.status == 200;
            },
            [&](const char* data, std::size_t len) {
                out.write(data, static_cast<std::streamsize>(len));
                return static_cast<bool>(out);
            });
        out.close();
        if (res && status == 200) {
            std::filesystem::rename(part, dest);
            return;
        }
        std::filesystem::remove(part);
        last_error = status != 0 ? "HTTP " + std::to_string(status) : httplib::to_string(res.error());
        if (status == 404 || status == 401 || status == 403) break;
    }
    throw Error(ErrorCode::DownloadFailed, "download of " + url + " failed: " + last_error);
}

inline std::uint32_t le32(const unsigned char* p) {
    return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

} // namespace detail

/// Extracts the first entry of a zip archive (stored or deflated) into
/// `out_dir` and returns its path.
inline std::filesystem::path extract_zip_first_entry(const std::filesystem::path& zip, const std::filesystem::path& out_dir) {
    std::ifstream in(zip, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "file not found: " + zip.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    const std::size_t tail = std::min<std::size_t>(size, 65536 + 22);
    std::vector<unsigned char> buf(tail);
    in.seekg(static_cast<std::streamoff>(size - tail));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(tail));
    std::optional<std::size_t> eocd;
    for (std::size_t i = tail >= 22 ? tail - 22 + 1 : 0; i-- > 0;)
        if (detail::le32(&buf[i]) == 0x06054b50) {
            eocd = i;
            break;
        }
    const auto bad = [&](const std::string& why) { return Error(ErrorCode::DownloadFailed, zip.string() + ": " + why); };
    if (!eocd) throw bad("not a zip archive");
    const std::uint32_t cd_offset = detail::le32(&buf[*eocd + 16]);

    std::array<unsigned char, 46> cd{};
    in.seekg(cd_offset);
    in.read(reinterpret_cast<char*>(cd.data()), cd.size());
    if (!in || detail::le32(cd.data()) != 0x02014b50) throw bad("bad central directory");
    const auto method = detail::le16(&cd[10]);
    const std::uint64_t comp_size = detail::le32(&cd[20]);
    const auto name_len = detail::le16(&cd[28]);
    const std::uint32_t local_offset = detail::le32(&cd[42]);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    name = std::filesystem::path(name).filename().string();
    if (name.empty()) throw bad("empty entry name");

    std::array<unsigned char, 30> lh{};
    in.seekg(local_offset);
    in.read(reinterpret_cast<char*>(lh.data()), lh.size());
    if (!in || detail::le32(lh.data()) != 0x04034b50) throw bad("bad local header");
    in.seekg(local_offset + 30 + detail::le16(&lh[26]) + detail::le16(&lh[28]));

    const auto dest = out_dir / name;
    std::ofstream out(dest, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + dest.string());
    std::vector<char> inbuf(1 << 16), outbuf(1 << 16);
    std::uint64_t remaining = comp_size;
    if (method == 0) {
        while (remaining > 0) {
            const auto n = static_cast<std::streamsize>(std::min<std::uint64_t>(remaining, inbuf.size()));
            in.read(inbuf.data(), n);
            if (in.gcount() != n) throw bad("truncated entry");
            out.write(inbuf.data(), n);
            remaining -= static_cast<std::uint64_t>(n);
        }
        return dest;
    }
    if (method != 8) throw bad("unsupported compression method " + std::to_string(method));
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw bad("inflate init failed");
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (zs.avail_in == 0) {
            const auto n = static_cast<std::streamsize>(std::min<std::uint64_t>(remaining, inbuf.size()));
            if (n == 0) break;
            in.read(inbuf.data(), n);
            remaining -= static_cast<std::uint64_t>(n);
            zs.next_in = reinterpret_cast<Bytef*>(inbuf.data());
            zs.avail_in = static_cast<uInt>(in.gcount());
        }
        zs.next_out = reinterpret_cast<Bytef*>(outbuf.data());
        zs.avail_out = static_cast<uInt>(outbuf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw bad("corrupt deflate stream");
        }
        out.write(outbuf.data(), static_cast<std::streamsize>(outbuf.size() - zs.avail_out));
    }
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw bad("truncated deflate stream");
    return dest;
}

/// Downloads the selected public datasets into `target`, skipping files whose
/// recorded checksum still matches, and writes `datasets.json` alongside.
inline FetchResult fetch_public_datasets(const std::filesystem::path& target, const AssetCatalog& catalog,
                                         const FetchOptions& opt = {}) {
    std::filesystem::create_directories(target);
    const auto record = detail::read_fetch_record(target);
    FetchResult result;
    auto base_url = [&](const DatasetSource& d) {
        const auto it = opt.url_overrides.find(d.id);
        return it != opt.url_overrides.end() ? it->second : d.url;
    };
    auto fetch_one = [&](const DatasetSource& d, const std::string& url, const std::string& rel) {
        const auto path = target / rel;
        std::filesystem::create_directories(path.parent_path());
        FetchedFile f{d.id, rel, url, "", 0, false};
        if (detail::cached_file_ok(path, record, rel)) {
            f.cached = true;
        } else {
            detail::download_file(url, path, opt);
        }
        f.sha256 = sha256_file(path);
        f.bytes = std::filesystem::file_size(path);
        result.files.push_back(f);
        return path;
    };

    for (const auto& d : catalog.datasets)
        if (!d.is_public()) result.unavailable.push_back(d);

    for (const auto& id : opt.datasets) {
        const auto* d = catalog.dataset(id);
        if (!d) throw Error(ErrorCode::InvalidArgument, "unknown dataset: " + id);
        if (!d->is_public()) throw Error(ErrorCode::InvalidArgument, id + " is " + d->status);
        if (id == "gpt2-output") {
            for (const auto& v : opt.gpt2_variants) {
                if (std::find(d->variants.begin(), d->variants.end(), v) == d->variants.end())
                    throw Error(ErrorCode::InvalidArgument, "unknown GPT-2 variant: " + v);
                for (const auto& s : opt.gpt2_splits) {
                    const auto name = v + "." + s + ".jsonl";
                    fetch_one(*d, base_url(*d) + "/" + name, id + "/" + name);
                }
            }
        } else if (id == "wiki-intro") {
            const auto url = base_url(*d);
            const auto zip_name = std::filesystem::path(detail::parse_url(url).path).filename().string();
            const auto zip = fetch_one(*d, url, id + "/" + zip_name);
            const bool zip_cached = result.files.back().cached;
            const auto csv_rel = id + "/" + std::filesystem::path(zip_name).stem().string();
            const auto csv_path = target / csv_rel;
            FetchedFile f{d->id, csv_rel, url, "", 0, zip_cached && detail::cached_file_ok(csv_path, record, csv_rel)};
            if (!f.cached) {
                const auto extracted = extract_zip_first_entry(zip, zip.parent_path());
                if (extracted != csv_path) std::filesystem::rename(extracted, csv_path);
            }
            f.sha256 = sha256_file(csv_path);
            f.bytes = std::filesystem::file_size(csv_path);
            result.files.push_back(f);
        } else {
            throw Error(ErrorCode::InvalidArgument, "no downloader for dataset " + id);
        }
    }

    std::ofstream out(target / kDatasetRecordFile, std::ios::binary | std::ios::trunc);
    out << result.to_json().dump(2) << "\n";
    return result;
}

// ------------------------------------------------------- dataset corpora

/// webtext.<split>.jsonl as human text against <variant>.<split>.jsonl.
inline Corpus load_gpt2_pair(const std::filesystem::path& dir, const std::string& variant, const std::string& split) {
    auto side = [&](const std::string& name, Label label) {
        Schema s;
        s.constant_label = label;
        s.source = name;
        s.id_prefix = name + "-";
        return load_corpus(dir / (name + "." + split + ".jsonl"), Format::JSONL, s);
    };
    return merge_corpora({side("webtext", Label::Human), side(variant, Label::Machine)});
}

/// One human and one machine document per row of the Wiki intro CSV.
inline Corpus load_wiki_intro(const std::filesystem::path& csv_path) {
    Schema s;
    s.human_text_column = "wiki_intro";
    s.machine_text_column = "generated_intro";
    s.source = "wiki";
    return load_corpus(csv_path, Format::CSV, s);
}

} // namespace mgtd
