#pragma once

#include <stdexcept>
#include <string>

namespace vsc {

enum class ErrorKind {
  kConfig,
  kManifestSchema,
  kRowParse,
  kIo,
  kDecode,
  kInsufficientData,
  kEmptyInput,
  kValidation,
  kNotFound,
  kRange,
  kState,
  kIncomplete,
  kAlignment,
  kDegenerate,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI,
/// the annotation server) can map it to an exit code or HTTP status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vsc
