#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "network_io.hpp"

// Typed field access for JSON documents; failures throw ParseError carrying a JSON pointer.
namespace msrd::jf {

using nlohmann::json;

[[noreturn]] inline void semantic(const std::string& path, const std::string& msg) {
    throw ParseError((path.empty() ? "/" : path) + ": " + msg, 0, 0, path.empty() ? "/" : path);
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) semantic(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) semantic(path + "/" + key, "missing required key");
    return *it;
}

inline std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) semantic(path, "expected a string");
    return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) semantic(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) semantic(path, "expected a finite number");
    return d;
}

inline int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) semantic(path, "expected an integer");
    const auto x = v.get<long long>();
    if (x < -1000000 || x > 1000000) semantic(path, "integer out of range");
    return static_cast<int>(x);
}

inline std::uint64_t get_u64(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    semantic(path, "expected a non-negative integer");
}

inline bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) semantic(path, "expected a boolean");
    return v.get<bool>();
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
    if (!obj.is_object()) semantic(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) semantic(path + "/" + it.key(), "unknown key");
    }
}

}  // namespace msrd::jf
