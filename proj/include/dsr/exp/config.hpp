#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "dsr/common.hpp"

namespace dsr {

inline const char* kToolVersion = "dsrlab 0.1.0";

namespace cfg {

// Dotted-path lookup into a JSON document; errors carry the field path.
inline const nlohmann::json* find(const nlohmann::json& doc, const std::string& dotted) {
    const nlohmann::json* cur = &doc;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

template <typename T>
T get_or(const nlohmann::json& doc, const std::string& dotted, T fallback) {
    const nlohmann::json* node = find(doc, dotted);
    if (node == nullptr || node->is_null()) return fallback;
    try {
        return node->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(dotted + ": " + e.what());
    }
}

template <typename T>
T get_required(const nlohmann::json& doc, const std::string& dotted) {
    const nlohmann::json* node = find(doc, dotted);
    if (node == nullptr || node->is_null()) throw ValidationError(dotted + ": missing required field");
    try {
        return node->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(dotted + ": " + e.what());
    }
}

// --set path=value override; the value is parsed as JSON when possible and
// falls back to a plain string.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    require(eq != std::string::npos && eq > 0, "--set expects path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        value = raw;
    }
    nlohmann::json* cur = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        require(!key.empty(), "--set: empty key segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            break;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace cfg

}  // namespace dsr
