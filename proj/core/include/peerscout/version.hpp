#pragma once

namespace peerscout {

inline constexpr const char* kToolName = "peerscout";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace peerscout
