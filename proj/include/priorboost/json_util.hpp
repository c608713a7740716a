#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "priorboost/errors.hpp"

namespace priorboost {

using json = nlohmann::json;

// Rejects keys outside `allowed`; `context` names the enclosing block.
inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                       std::string_view context) {
  if (!j.is_object()) {
    throw ValidationError(std::string(context) + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) {
      throw ValidationError(std::string(context) + ": unknown key '" + item.key() + "'");
    }
  }
}

// Reads j[key] into `out` when present, leaving the default otherwise.
template <class T>
void read_optional(const json& j, std::string_view key, T& out, std::string_view context) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(context) + "." + std::string(key) + ": " + e.what());
  }
}

}  // namespace priorboost
