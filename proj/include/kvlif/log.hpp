#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

#include "kvlif/errors.hpp"

// Log verbosity comes from the KVLIF_LOG environment variable:
//   quiet|0   nothing
//   info|1    run progress (default)
//   debug|2   per-epoch / per-point detail
// Everything goes to stderr so stdout stays machine-readable.

namespace kvlif {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel parse_log_level(const std::string& s) {
    if (s == "quiet" || s == "0") return LogLevel::quiet;
    if (s == "info" || s == "1" || s.empty()) return LogLevel::info;
    if (s == "debug" || s == "2") return LogLevel::debug;
    throw ConfigError("KVLIF_LOG must be one of quiet|info|debug (or 0|1|2), got '" + s + "'");
}

inline LogLevel log_level() {
    static const LogLevel lvl = [] {
        const char* env = std::getenv("KVLIF_LOG");
        if (!env) return LogLevel::info;
        try {
            return parse_log_level(env);
        } catch (const ConfigError&) {
            return LogLevel::info;  // a bad env var should not kill a run
        }
    }();
    return lvl;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "[kvlif] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "[kvlif] " << msg << "\n";
}

} // namespace kvlif
