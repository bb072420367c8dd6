#pragma once

namespace multcancel {
inline constexpr const char* kToolName = "multcancel";
inline constexpr const char* kToolVersion = "0.1.0";
}  // namespace multcancel
