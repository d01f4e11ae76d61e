#ifndef SSM_SRC_JSON_FIELDS_HPP
#define SSM_SRC_JSON_FIELDS_HPP

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ssm/errors.hpp"

namespace ssm::detail {

inline void check_keys(const nlohmann::json& doc, std::initializer_list<std::string_view> keys, std::string_view what) {
  if (!doc.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
  for (const auto& item : doc.items()) {
    bool known = false;
    for (auto key : keys) known = known || item.key() == key;
    if (!known) throw ParseError("unknown " + std::string(what) + " field '" + item.key() + "'");
  }
}

template <class T>
void read_field(const nlohmann::json& doc, const char* key, T& field, std::string_view what) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + " field '" + key + "': " + e.what());
  }
}

}  // namespace ssm::detail

#endif  // SSM_SRC_JSON_FIELDS_HPP
