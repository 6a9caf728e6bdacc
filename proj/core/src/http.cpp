#include "peerscout/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace peerscout {

std::optional<ParsedUrl> parse_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) return std::nullopt;
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") return std::nullopt;

    const auto rest = url.substr(scheme_end + 3);
    if (rest.empty()) return std::nullopt;
    const auto path_start = rest.find('/');

    ParsedUrl parsed;
    parsed.scheme_host_port =
        std::string(scheme) + "://" +
        std::string(path_start == std::string_view::npos ? rest : rest.substr(0, path_start));
    std::string_view path_and_query =
        path_start == std::string_view::npos ? std::string_view("/") : rest.substr(path_start);
    const auto query_start = path_and_query.find('?');
    parsed.path = std::string(path_and_query.substr(0, query_start));
    if (query_start != std::string_view::npos) {
        parsed.query = std::string(path_and_query.substr(query_start + 1));
    }
    return parsed;
}

std::string url_encode(std::string_view value) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (const char c : value) {
        const auto u = static_cast<unsigned char>(c);
        const bool unreserved = (u >= 'A' && u <= 'Z') || (u >= 'a' && u <= 'z') ||
                                (u >= '0' && u <= '9') || u == '-' || u == '_' ||
                                u == '.' || u == '~';
        if (unreserved) {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(kHex[u >> 4]);
            out.push_back(kHex[u & 0x0F]);
        }
    }
    return out;
}

namespace {

httplib::Headers to_httplib_headers(const std::map<std::string, std::string>& headers) {
    httplib::Headers out;
    for (const auto& [key, value] : headers) out.emplace(key, value);
    return out;
}

std::optional<HttpResponse> from_result(const httplib::Result& result) {
    if (!result) return std::nullopt;
    return HttpResponse{result->status, result->body};
}

httplib::Client make_client(const ParsedUrl& parsed, int timeout_seconds) {
    httplib::Client client(parsed.scheme_host_port);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    client.set_follow_location(true);
    return client;
}

}  // namespace

std::optional<HttpResponse> http_get(const std::string& url,
                                     const std::map<std::string, std::string>& headers,
                                     int timeout_seconds) {
    const auto parsed = parse_url(url);
    if (!parsed) return std::nullopt;
    auto client = make_client(*parsed, timeout_seconds);
    std::string target = parsed->path;
    if (!parsed->query.empty()) target += "?" + parsed->query;
    return from_result(client.Get(target, to_httplib_headers(headers)));
}

std::optional<HttpResponse> http_post_json(const std::string& url,
                                           const std::map<std::string, std::string>& headers,
                                           const std::string& json_body,
                                           int timeout_seconds) {
    const auto parsed = parse_url(url);
    if (!parsed) return std::nullopt;
    auto client = make_client(*parsed, timeout_seconds);
    std::string target = parsed->path;
    if (!parsed->query.empty()) target += "?" + parsed->query;
    return from_result(client.Post(target, to_httplib_headers(headers), json_body,
                                   "application/json"));
}

}  // namespace peerscout
