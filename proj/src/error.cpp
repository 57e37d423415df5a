#include "hsnli/error.hpp"

namespace hsnli {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
      return "parse";
    case ErrorKind::validation:
      return "validation";
    case ErrorKind::precondition:
      return "precondition";
    case ErrorKind::missing_translation:
      return "missing_translation";
    case ErrorKind::backend:
      return "backend";
    case ErrorKind::io:
      return "io";
    case ErrorKind::config:
      return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace hsnli
