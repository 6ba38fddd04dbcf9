#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathlasso/errors.hpp"

namespace pathlasso {

enum class VariableKind { continuous, binary, categorical };
enum class Transform { none, natural_log, quartile_bin };
enum class VariableRole { outcome, candidate, stratifier, weight, id };

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::continuous;
  std::string reference_level;           // categorical only
  std::string positive_level;            // binary only; level coded as 1
  Transform transform = Transform::none;
  VariableRole role = VariableRole::candidate;
  bool rank_sum = false;                 // balance test override for non-normal continuous
};

using Schema = std::vector<VariableSpec>;

inline VariableKind kind_from_string(const std::string& s) {
  if (s == "continuous") return VariableKind::continuous;
  if (s == "binary") return VariableKind::binary;
  if (s == "categorical") return VariableKind::categorical;
  throw SchemaError("unknown variable kind: " + s);
}

inline std::string to_string(VariableKind k) {
  switch (k) {
    case VariableKind::continuous: return "continuous";
    case VariableKind::binary: return "binary";
    case VariableKind::categorical: return "categorical";
  }
  return "?";
}

inline Transform transform_from_string(const std::string& s) {
  if (s == "none") return Transform::none;
  if (s == "natural_log") return Transform::natural_log;
  if (s == "quartile_bin") return Transform::quartile_bin;
  throw SchemaError("unknown transform: " + s);
}

inline std::string to_string(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::natural_log: return "natural_log";
    case Transform::quartile_bin: return "quartile_bin";
  }
  return "?";
}

inline VariableRole role_from_string(const std::string& s) {
  if (s == "outcome") return VariableRole::outcome;
  if (s == "candidate") return VariableRole::candidate;
  if (s == "stratifier") return VariableRole::stratifier;
  if (s == "weight") return VariableRole::weight;
  if (s == "id") return VariableRole::id;
  throw SchemaError("unknown role: " + s);
}

inline std::string to_string(VariableRole r) {
  switch (r) {
    case VariableRole::outcome: return "outcome";
    case VariableRole::candidate: return "candidate";
    case VariableRole::stratifier: return "stratifier";
    case VariableRole::weight: return "weight";
    case VariableRole::id: return "id";
  }
  return "?";
}

inline VariableSpec variable_spec_from_json(const nlohmann::json& j) {
  VariableSpec v;
  v.name = j.at("name").get<std::string>();
  v.kind = kind_from_string(j.value("kind", "continuous"));
  v.reference_level = j.value("reference_level", "");
  v.positive_level = j.value("positive_level", "");
  v.transform = transform_from_string(j.value("transform", "none"));
  v.role = role_from_string(j.value("role", "candidate"));
  v.rank_sum = j.value("rank_sum", false);
  return v;
}

inline nlohmann::json to_json(const VariableSpec& v) {
  nlohmann::json j;
  j["name"] = v.name;
  j["kind"] = to_string(v.kind);
  if (!v.reference_level.empty()) j["reference_level"] = v.reference_level;
  if (!v.positive_level.empty()) j["positive_level"] = v.positive_level;
  j["transform"] = to_string(v.transform);
  j["role"] = to_string(v.role);
  if (v.rank_sum) j["rank_sum"] = true;
  return j;
}

inline Schema schema_from_json(const nlohmann::json& j) {
  Schema s;
  const auto& arr = j.is_array() ? j : j.at("variables");
  for (const auto& item : arr) s.push_back(variable_spec_from_json(item));
  int outcomes = 0;
  for (const auto& v : s) {
    if (v.role == VariableRole::outcome) {
      ++outcomes;
      if (v.kind != VariableKind::binary) {
        throw SchemaError("outcome variable must be binary: " + v.name);
      }
    }
  }
  if (outcomes != 1) throw SchemaError("schema must declare exactly one outcome variable");
  return s;
}

inline const VariableSpec* find_variable(const Schema& s, const std::string& name) {
  for (const auto& v : s) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

inline const VariableSpec& outcome_variable(const Schema& s) {
  for (const auto& v : s) {
    if (v.role == VariableRole::outcome) return v;
  }
  throw SchemaError("schema has no outcome variable");
}

}  // namespace pathlasso
