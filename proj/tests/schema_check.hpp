#pragma once

// Minimal JSON Schema checker covering the keywords used by the verdict
// schema: type, enum, required, properties, additionalProperties, items,
// minimum, maximum.

#include <json.hpp>

#include <string>
#include <vector>

namespace guas::testing {

inline bool type_matches(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

inline void check_schema(const nlohmann::json& v, const nlohmann::json& s, const std::string& path,
                         std::vector<std::string>& errors) {
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || type_matches(v, t.get<std::string>());
    } else {
      ok = type_matches(v, s["type"].get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": wrong type");
      return;
    }
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) errors.push_back(path + ": not in enum");
  }
  if (v.is_number()) {
    if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>()) {
      errors.push_back(path + ": below minimum");
    }
    if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>()) {
      errors.push_back(path + ": above maximum");
    }
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& r : s["required"]) {
        if (!v.contains(r.get<std::string>())) errors.push_back(path + ": missing " + r.get<std::string>());
      }
    }
    for (const auto& [key, value] : v.items()) {
      if (s.contains("properties") && s["properties"].contains(key)) {
        check_schema(value, s["properties"][key], path + "." + key, errors);
      } else if (s.contains("additionalProperties")) {
        const auto& ap = s["additionalProperties"];
        if (ap.is_boolean() && !ap.get<bool>()) {
          errors.push_back(path + ": unexpected key " + key);
        } else if (ap.is_object()) {
          check_schema(value, ap, path + "." + key, errors);
        }
      }
    }
  }
  if (v.is_array() && s.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      check_schema(v[i], s["items"], path + "[" + std::to_string(i) + "]", errors);
    }
  }
}

}  // namespace guas::testing
