#include "painbvp/error.hpp"

namespace painbvp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kInvalidConfiguration: return "invalid-configuration";
    case ErrorCode::kCannotOversample: return "cannot-oversample";
    case ErrorCode::kUndefinedClass: return "undefined-class";
    case ErrorCode::kUndefinedStatistic: return "undefined-statistic";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kSearchFailed: return "search-failed";
    case ErrorCode::kRunFailed: return "run-failed";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace painbvp
