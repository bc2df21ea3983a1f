#include "hosc/error.hpp"

namespace hosc {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Dimension: return "dimension";
    case ErrorCategory::Argument: return "argument";
    case ErrorCategory::Numeric: return "numeric";
    case ErrorCategory::Contract: return "contract";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

}  // namespace hosc
