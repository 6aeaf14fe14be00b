#include "hdglue/error.hpp"

namespace hdglue {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidDimension: return "invalid-dimension";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kInvalidWeight: return "invalid-weight";
    case ErrorKind::kUnderflow: return "underflow";
    case ErrorKind::kInvalidValue: return "invalid-value";
    case ErrorKind::kTooManyLevels: return "too-many-levels";
    case ErrorKind::kLengthMismatch: return "length-mismatch";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kUntrained: return "untrained";
    case ErrorKind::kRegistryMismatch: return "registry-mismatch";
    case ErrorKind::kUnknownMember: return "unknown-member";
    case ErrorKind::kMissingEmbedding: return "missing-embedding";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSchedule: return "schedule";
  }
  return "unknown";
}

}  // namespace hdglue
