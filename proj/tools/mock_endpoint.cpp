#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mock_endpoint.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Offline chat-completion endpoint for rephrase tests"};
    std::string mode = "echo";
    int port = 8089;
    mgtd::mock::Options opt;
    app.add_option("--mode", mode, "echo, disjoint, partial or varying")->check(CLI::IsMember({"echo", "disjoint", "partial", "varying"}));
    app.add_option("--port", port, "listen port (0 picks a free one)");
    app.add_option("--fraction", opt.fraction, "kept vocabulary fraction in partial mode")->check(CLI::Range(0.0, 1.0));
    app.add_option("--prefix", opt.prefix, "URL path prefix");
    app.add_option("--require-key", opt.required_key, "reject requests without this bearer token");
    app.add_option("--rate-limit-first", opt.rate_limit_first, "answer the first N requests with HTTP 429");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    opt.mode = *mgtd::mock::parse_mode(mode);
    mgtd::mock::Server server(opt);
    const int bound = server.bind(port);
    if (bound < 0) {
        std::cerr << "cannot bind port " << port << "\n";
        return 1;
    }
    std::cout << "listening on http://127.0.0.1:" << bound << opt.prefix << std::endl;
    server.listen();
    return 0;
}
