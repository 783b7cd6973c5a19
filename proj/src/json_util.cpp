#include "plcprov/json_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace plcprov {
namespace jsonu {

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
    if (!j.is_object()) {
        throw ParseError(where + ": expected a JSON object");
    }
    for (const char* key : required) {
        if (!j.contains(key)) {
            throw ParseError(where + ": missing required key \"" + key + "\"");
        }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        auto match = [&k](const char* c) { return k == c; };
        if (std::any_of(required.begin(), required.end(), match)) continue;
        if (std::any_of(optional.begin(), optional.end(), match)) continue;
        throw ParseError(where + ": unknown key \"" + k + "\"");
    }
}

void check_keys(const json& j, const std::string& where,
                const std::vector<std::string>& required,
                std::initializer_list<const char*> optional) {
    if (!j.is_object()) {
        throw ParseError(where + ": expected a JSON object");
    }
    for (const std::string& key : required) {
        if (!j.contains(key)) {
            throw ParseError(where + ": missing required key \"" + key + "\"");
        }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (std::find(required.begin(), required.end(), k) != required.end()) continue;
        if (std::any_of(optional.begin(), optional.end(),
                        [&k](const char* c) { return k == c; }))
            continue;
        throw ParseError(where + ": unknown key \"" + k + "\"");
    }
}

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ParseError(where + ": missing required key \"" + key + "\"");
    }
    return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_string()) throw ParseError(where + ": key \"" + key + "\" must be a string");
    return v.get<std::string>();
}

uint64_t require_uint(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
        throw ParseError(where + ": key \"" + key + "\" must be a non-negative integer");
    }
    return v.get<uint64_t>();
}

double require_double(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_number()) throw ParseError(where + ": key \"" + key + "\" must be a number");
    return v.get<double>();
}

bool require_bool(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_boolean()) throw ParseError(where + ": key \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

json parse_document(const std::string& text, const std::string& where) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(where + ": invalid JSON");
    }
    return j;
}

json load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str(), path);
}

}  // namespace jsonu
}  // namespace plcprov
