#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace peerscout {

// Provenance header written as the first line of every generated artifact:
//   # manifest {"command":...,"config_digest":...,...}
// Loaders ignore '#' lines, so manifested files stay machine readable.
struct RunManifest {
    std::string command;
    std::string config_digest;
    std::map<std::string, std::string> input_digests;  // label -> sha256
    std::string timestamp;                             // ISO 8601 UTC
    std::string tool_version;
};

// Current UTC time, or SOURCE_DATE_EPOCH when set so artifact bytes can be
// pinned for reproducibility checks.
std::string manifest_timestamp();

RunManifest make_manifest(std::string command, std::string_view config_text,
                          const std::vector<std::pair<std::string, std::filesystem::path>>&
                              inputs);

std::string manifest_line(const RunManifest& manifest);
std::optional<RunManifest> parse_manifest_line(std::string_view line);

}  // namespace peerscout
