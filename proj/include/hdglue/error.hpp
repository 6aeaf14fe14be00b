#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdglue {

enum class ErrorKind {
  kInvalidDimension,
  kDimensionMismatch,
  kInvalidWeight,
  kUnderflow,
  kInvalidValue,
  kTooManyLevels,
  kLengthMismatch,
  kEmptyInput,
  kUntrained,
  kRegistryMismatch,
  kUnknownMember,
  kMissingEmbedding,
  kFormat,
  kIo,
  kSchedule,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the CLI)
// can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hdglue
