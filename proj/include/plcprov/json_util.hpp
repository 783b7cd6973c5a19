#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcprov/errors.hpp"

namespace plcprov {

using json = nlohmann::json;
// ordered_json keeps insertion order on dump, which is what makes every
// serialized artifact byte-stable. Use it for anything we write out.
using ojson = nlohmann::ordered_json;

namespace jsonu {

// Strict-mode field check: every key in `j` must appear in `required` or
// `optional`, and every `required` key must be present. Throws ParseError
// naming the offending key and `where` (a human-readable location).
void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {});
// Same, for key lists assembled at runtime.
void check_keys(const json& j, const std::string& where,
                const std::vector<std::string>& required,
                std::initializer_list<const char*> optional = {});

const json& require(const json& j, const char* key, const std::string& where);

std::string require_string(const json& j, const char* key, const std::string& where);
uint64_t require_uint(const json& j, const char* key, const std::string& where);
double require_double(const json& j, const char* key, const std::string& where);
bool require_bool(const json& j, const char* key, const std::string& where);

json parse_document(const std::string& text, const std::string& where);
json load_document(const std::string& path);

}  // namespace jsonu
}  // namespace plcprov
