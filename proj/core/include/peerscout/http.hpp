#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace peerscout {

struct HttpResponse {
    int status = 0;
    std::string body;
};

struct ParsedUrl {
    std::string scheme_host_port;  // e.g. "https://example.org:443"
    std::string path;              // begins with '/', query excluded
    std::string query;             // without leading '?'
};

std::optional<ParsedUrl> parse_url(std::string_view url);

std::string url_encode(std::string_view value);

// One-shot requests; nullopt on connection-level failure. HTTPS is
// supported via OpenSSL.
std::optional<HttpResponse> http_get(const std::string& url,
                                     const std::map<std::string, std::string>& headers,
                                     int timeout_seconds);
std::optional<HttpResponse> http_post_json(const std::string& url,
                                           const std::map<std::string, std::string>& headers,
                                           const std::string& json_body,
                                           int timeout_seconds);

}  // namespace peerscout
