#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hsnli/error.hpp"
#include "toml.hpp"

namespace hsnli::detail {

inline toml::table parse_toml(std::string_view text, std::string_view source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::string msg(source);
    msg += ":";
    msg += std::to_string(e.source().begin.line);
    msg += ": ";
    msg += e.description();
    throw Error(ErrorKind::config, msg);
  }
}

inline std::vector<std::string> string_array(const toml::node_view<const toml::node>& node,
                                             std::string_view key) {
  std::vector<std::string> out;
  if (!node) return out;
  const toml::array* arr = node.as_array();
  if (arr == nullptr) {
    throw Error(ErrorKind::config, std::string(key) + " must be an array of strings");
  }
  for (const auto& item : *arr) {
    const auto value = item.value<std::string>();
    if (!value) {
      throw Error(ErrorKind::config, std::string(key) + " must be an array of strings");
    }
    out.push_back(*value);
  }
  return out;
}

}  // namespace hsnli::detail
