#pragma once

#include <string>

#include "kvlif/io_util.hpp"
#include "kvlif/json_util.hpp"
#include "kvlif/version.hpp"

// Run manifest: the full record of one CLI invocation. Fixed key order so
// two runs of the same command diff clean; everything except the "timing"
// block is a pure function of (config, seed, build).
//
//   schema_version, tool_version, command, seed, precision,
//   config   — the resolved experiment config, embedded verbatim
//   metrics  — command-specific numbers (histories, grids, reports)
//   artifacts— file names written next to the manifest
//   timing   — started_utc + wall_ms, the only nondeterministic part

namespace kvlif {

struct RunManifest {
    jsonio::json j;

    bool operator==(const RunManifest& o) const { return j == o.j; }
};

inline RunManifest make_manifest(const std::string& command, const jsonio::json& resolved_config,
                                 std::uint64_t seed) {
    RunManifest m;
    m.j["schema_version"] = manifest_schema_version;
    m.j["tool_version"] = version_string;
    m.j["command"] = command;
    m.j["seed"] = seed;
    m.j["precision"] = "fp64";
    m.j["config"] = resolved_config;
    m.j["metrics"] = jsonio::json::object();
    m.j["artifacts"] = jsonio::json::array();
    m.j["timing"] = {{"started_utc", ""}, {"wall_ms", 0.0}};
    return m;
}

inline std::string emit_manifest(const RunManifest& m) { return m.j.dump(2) + "\n"; }

inline RunManifest parse_manifest(const std::string& text) {
    RunManifest m;
    try {
        m.j = jsonio::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("manifest is not valid JSON: ") + e.what());
    }
    jsonio::expect_object(m.j, "manifest");
    const auto ver =
        jsonio::as_uint(jsonio::require(m.j, "manifest", "schema_version"), "manifest.schema_version");
    if (ver != manifest_schema_version)
        throw ConfigError("manifest: schema_version " + std::to_string(ver) +
                          " is not supported; this build reads version " +
                          std::to_string(manifest_schema_version));
    return m;
}

inline void save_manifest(const std::string& path, const RunManifest& m) {
    write_text_file(path, emit_manifest(m));
}

inline RunManifest load_manifest(const std::string& path) {
    return parse_manifest(read_text_file(path));
}

// The deterministic portion: everything minus wall-clock. Two runs with the
// same seed must agree on this view byte for byte.
inline jsonio::json manifest_numeric_view(const RunManifest& m) {
    jsonio::json copy = m.j;
    copy.erase("timing");
    return copy;
}

} // namespace kvlif
