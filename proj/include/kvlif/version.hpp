#pragma once

namespace kvlif {

inline constexpr int version_major = 0;
inline constexpr int version_minor = 1;
inline constexpr int version_patch = 0;
inline constexpr const char* version_string = "0.1.0";

// Bumped when the on-disk layout of configs / checkpoints / manifests changes.
inline constexpr int config_schema_version = 1;
inline constexpr int checkpoint_format_version = 1;
inline constexpr int manifest_schema_version = 1;

} // namespace kvlif
