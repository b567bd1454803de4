#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "vpon/errors.hpp"

namespace vpon::detail {

inline void expect_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("config: " + path + " must be an object");
}

/// Strict key policy: anything outside `allowed` fails with its full path.
inline void check_keys(const nlohmann::json& obj, const std::string& path,
                       const std::set<std::string>& allowed) {
  expect_object(obj, path);
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key " + path + "." + item.key());
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& path,
                                     const char* key) {
  if (!obj.contains(key)) throw ConfigError("config: missing key " + path + "." + key);
  return obj.at(key);
}

inline double as_double(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("config: " + path + " must be a number");
  return j.get<double>();
}

inline int as_int(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError("config: " + path + " must be an integer");
  return j.get<int>();
}

inline long long as_int64(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError("config: " + path + " must be an integer");
  return j.get<long long>();
}

inline bool as_bool(const nlohmann::json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError("config: " + path + " must be a boolean");
  return j.get<bool>();
}

inline std::string as_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("config: " + path + " must be a string");
  return j.get<std::string>();
}

}  // namespace vpon::detail
