#pragma once

#include <string>

#include <httplib.h>

#include "mgtd/error.hpp"

namespace mgtd::detail {

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};

/// "https://host:port/a/b/" -> {"https://host:port", "/a/b"}
inline ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    p.scheme_host_port = url.substr(0, path_start);
    p.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!p.path.empty() && p.path.back() == '/') p.path.pop_back();
    return p;
}

} // namespace mgtd::detail
