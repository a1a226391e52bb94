#include "vsc/error.hpp"

namespace vsc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kManifestSchema: return "manifest-schema";
    case ErrorKind::kRowParse: return "row-parse";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kDecode: return "decode";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kNotFound: return "not-found";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kState: return "state";
    case ErrorKind::kIncomplete: return "incomplete";
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kDegenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace vsc
