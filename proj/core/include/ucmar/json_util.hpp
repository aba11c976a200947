#pragma once

#include <string>

#include "json.hpp"
#include "ucmar/errors.hpp"

namespace ucmar {

using Json = nlohmann::json;

/// Fetches object[key], throwing ConfigError naming the field when absent.
/// `where` identifies the document (e.g. "manifest.json") in diagnostics.
inline const Json& json_require(const Json& object, const std::string& key,
                                const std::string& where) {
  if (!object.is_object())
    throw ConfigError(where + ": expected a JSON object around field '" + key + "'");
  auto it = object.find(key);
  if (it == object.end()) throw ConfigError(where + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T json_get(const Json& object, const std::string& key, const std::string& where) {
  const Json& v = json_require(object, key, where);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace ucmar
