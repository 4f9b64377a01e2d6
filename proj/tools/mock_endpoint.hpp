#pragma once

// Offline chat-completion server used by the tests and the mock_endpoint
// tool. It answers POST <prefix>/chat/completions.

#include <atomic>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mgtd/tfidf.hpp"

namespace mgtd::mock {

enum class Mode {
    Echo,      // returns the text after the prompt's last "Text:\n" marker
    Disjoint,  // returns words that never occur in ordinary input
    Partial,   // keeps `fraction` of the source token types, pads with filler
    Varying,   // Partial with fraction cycling 0.2, 0.5, 0.8 per request
};

inline std::optional<Mode> parse_mode(const std::string& s) {
    if (s == "echo") return Mode::Echo;
    if (s == "disjoint") return Mode::Disjoint;
    if (s == "partial") return Mode::Partial;
    if (s == "varying") return Mode::Varying;
    return std::nullopt;
}

struct Options {
    Mode mode = Mode::Echo;
    double fraction = 0.5;
    std::string prefix = "/v1";
    std::string required_key;  // empty: accept any bearer token
    int rate_limit_first = 0;  // answer the first N requests with 429
};

inline std::string source_text(const std::string& prompt) {
    const std::string marker = "Text:\n";
    const auto pos = prompt.rfind(marker);
    return pos == std::string::npos ? prompt : prompt.substr(pos + marker.size());
}

inline std::string keep_fraction(const std::string& text, double fraction) {
    std::vector<std::string> types;
    std::set<std::string> seen;
    for (auto& t : extract_terms(text, 1))
        if (seen.insert(t).second) types.push_back(t);
    const auto keep = static_cast<std::size_t>(fraction * static_cast<double>(types.size()));
    std::string out;
    for (std::size_t i = 0; i < keep; ++i) out += types[i] + " ";
    out += "zqxfiller vwkpadding";
    return out;
}

inline std::string respond(const Options& opt, const std::string& prompt, std::size_t request_index) {
    switch (opt.mode) {
        case Mode::Echo: return source_text(prompt);
        case Mode::Disjoint: return "zqxalpha zqxbravo zqxcharlie zqxdelta";
        case Mode::Partial: return keep_fraction(source_text(prompt), opt.fraction);
        case Mode::Varying: {
            static constexpr double kCycle[] = {0.2, 0.5, 0.8};
            return keep_fraction(source_text(prompt), kCycle[request_index % 3]);
        }
    }
    return "";
}

class Server {
public:
    explicit Server(Options opt) : opt_(std::move(opt)) {
        server_.Post(opt_.prefix + "/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const auto n = requests_++;
            if (!opt_.required_key.empty() && req.get_header_value("Authorization") != "Bearer " + opt_.required_key) {
                res.status = 401;
                res.set_content(R"({"error":"unauthorized"})", "application/json");
                return;
            }
            if (static_cast<int>(n) < opt_.rate_limit_first) {
                res.status = 429;
                res.set_content(R"({"error":"rate limited"})", "application/json");
                return;
            }
            std::string prompt;
            try {
                const auto body = nlohmann::json::parse(req.body);
                prompt = body.at("messages").back().at("content").get<std::string>();
            } catch (const nlohmann::json::exception&) {
                res.status = 400;
                return;
            }
            const nlohmann::json out = {
                {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", respond(opt_, prompt, n)}}}}}}};
            res.set_content(out.dump(), "application/json");
        });
    }

    /// Binds to 127.0.0.1 on `port` (0 picks a free port) and returns the port.
    int bind(int port = 0) {
        if (port == 0) return server_.bind_to_any_port("127.0.0.1");
        return server_.bind_to_port("127.0.0.1", port) ? port : -1;
    }

    void listen() { server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }
    std::size_t requests() const { return requests_.load(); }

private:
    Options opt_;
    httplib::Server server_;
    std::atomic<std::size_t> requests_{0};
};

} // namespace mgtd::mock
