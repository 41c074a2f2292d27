#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sore {

enum class ErrorKind {
  EmptyDocument,
  TextTooShort,
  DimensionMismatch,
  ProviderUnavailable,
  CorruptIndex,
  ConfigParse,
  InvalidArgument,
};

// Single exception type for the library; `kind()` carries the
// machine-readable class used by the CLI exit codes and HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyDocument: return "EmptyDocument";
    case ErrorKind::TextTooShort: return "TextTooShort";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::CorruptIndex: return "CorruptIndex";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace sore
