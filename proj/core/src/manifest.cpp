#include "peerscout/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>

#include <nlohmann/json.hpp>

#include "peerscout/digest.hpp"
#include "peerscout/version.hpp"

namespace peerscout {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPrefix = "# manifest ";

}  // namespace

std::string manifest_timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        char* end = nullptr;
        const long long pinned = std::strtoll(epoch, &end, 10);
        if (end && *end == '\0') now = static_cast<std::time_t>(pinned);
    }
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[80];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  utc.tm_year + 1900, utc.tm_mon + 1, utc.tm_mday, utc.tm_hour,
                  utc.tm_min, utc.tm_sec);
    return buffer;
}

RunManifest make_manifest(
    std::string command, std::string_view config_text,
    const std::vector<std::pair<std::string, std::filesystem::path>>& inputs) {
    RunManifest manifest;
    manifest.command = std::move(command);
    manifest.config_digest = sha256_hex(config_text);
    for (const auto& [label, path] : inputs) {
        manifest.input_digests[label] = sha256_file_hex(path);
    }
    manifest.timestamp = manifest_timestamp();
    manifest.tool_version = kToolVersion;
    return manifest;
}

std::string manifest_line(const RunManifest& manifest) {
    ordered_json obj;
    obj["command"] = manifest.command;
    obj["config_digest"] = manifest.config_digest;
    obj["input_digests"] = ordered_json::object();
    for (const auto& [label, digest] : manifest.input_digests) {
        obj["input_digests"][label] = digest;
    }
    obj["timestamp"] = manifest.timestamp;
    obj["tool_version"] = manifest.tool_version;
    return std::string(kPrefix) + obj.dump();
}

std::optional<RunManifest> parse_manifest_line(std::string_view line) {
    if (!line.starts_with(kPrefix)) return std::nullopt;
    const json obj = json::parse(line.substr(kPrefix.size()), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
    RunManifest manifest;
    manifest.command = obj.value("command", "");
    manifest.config_digest = obj.value("config_digest", "");
    if (obj.contains("input_digests") && obj["input_digests"].is_object()) {
        for (const auto& [label, digest] : obj["input_digests"].items()) {
            if (digest.is_string()) {
                manifest.input_digests[label] = digest.get<std::string>();
            }
        }
    }
    manifest.timestamp = obj.value("timestamp", "");
    manifest.tool_version = obj.value("tool_version", "");
    return manifest;
}

}  // namespace peerscout
