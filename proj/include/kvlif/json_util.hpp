#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "kvlif/errors.hpp"

// Strict JSON plumbing shared by configs, checkpoints, and manifests.
// ordered_json keeps emission order stable so artifacts diff clean, and
// every reader rejects keys it does not know about — a typo in a config
// should fail loudly, not silently fall back to a default.

namespace kvlif {
namespace jsonio {

using json = nlohmann::ordered_json;

inline void reject_unknown(const json& obj, const std::string& ctx,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                known = true;
                break;
            }
        if (!known) {
            std::string list;
            for (const char* a : allowed) {
                if (!list.empty()) list += ", ";
                list += a;
            }
            throw ConfigError(ctx + ": unknown key '" + it.key() + "' (known keys: " + list + ")");
        }
    }
}

inline const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline void expect_object(const json& v, const std::string& what) {
    if (!v.is_object()) throw ConfigError(what + " must be an object");
}

inline double as_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + " must be a number");
    return v.get<double>();
}

inline std::uint64_t as_uint(const json& v, const std::string& what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(what + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline bool as_bool(const json& v, const std::string& what) {
    if (!v.is_boolean()) throw ConfigError(what + " must be true or false");
    return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& what) {
    if (!v.is_string()) throw ConfigError(what + " must be a string");
    return v.get<std::string>();
}

inline std::vector<double> as_number_array(const json& v, const std::string& what) {
    if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_number(e, what + " entries"));
    return out;
}

inline std::vector<std::size_t> as_size_array(const json& v, const std::string& what) {
    if (!v.is_array()) throw ConfigError(what + " must be an array of non-negative integers");
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(std::size_t(as_uint(e, what + " entries")));
    return out;
}

// Optional fields: missing or null means "keep the default".
inline double get_number(const json& obj, const std::string& ctx, const char* key, double dflt) {
    const json* v = find(obj, key);
    return v ? as_number(*v, ctx + "." + key) : dflt;
}

inline std::uint64_t get_uint(const json& obj, const std::string& ctx, const char* key,
                              std::uint64_t dflt) {
    const json* v = find(obj, key);
    return v ? as_uint(*v, ctx + "." + key) : dflt;
}

inline bool get_bool(const json& obj, const std::string& ctx, const char* key, bool dflt) {
    const json* v = find(obj, key);
    return v ? as_bool(*v, ctx + "." + key) : dflt;
}

inline std::string get_string(const json& obj, const std::string& ctx, const char* key,
                              const std::string& dflt) {
    const json* v = find(obj, key);
    return v ? as_string(*v, ctx + "." + key) : dflt;
}

inline const json& require(const json& obj, const std::string& ctx, const char* key) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError(ctx + ": missing required key '" + std::string(key) + "'");
    return *v;
}

} // namespace jsonio
} // namespace kvlif
