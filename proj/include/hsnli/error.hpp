#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsnli {

enum class ErrorKind {
  parse,
  validation,
  precondition,
  missing_translation,
  backend,
  io,
  config,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type. The kind is stable and
// is what the CLI prints as the machine-parsable error class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hsnli
