#pragma once

#include <stdexcept>
#include <string>

namespace dfw {

// Error categories double as CLI exit codes (0 is success).
enum class ErrorCode : int {
  kShapeMismatch = 2,
  kEmptyArm = 3,
  kCoding = 4,
  kNonConvergence = 5,
  kSingularSystem = 6,
  kOverflow = 7,
  kDimensionMismatch = 8,
  kZeroWeight = 9,
  kDegenerateWeights = 10,
  kInsufficientData = 11,
  kMissingCounterfactual = 12,
  kSchema = 13,
  kCount = 14,
  kMissingRealization = 15,
  kConfig = 16,
  kIo = 17,
};

inline const char* error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kEmptyArm: return "empty-arm";
    case ErrorCode::kCoding: return "coding";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kSingularSystem: return "singular-system";
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kZeroWeight: return "zero-total-weight";
    case ErrorCode::kDegenerateWeights: return "degenerate-weights";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kMissingCounterfactual: return "missing-counterfactual";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kCount: return "count";
    case ErrorCode::kMissingRealization: return "missing-realization";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_category(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace dfw
