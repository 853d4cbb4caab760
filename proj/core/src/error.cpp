#include "introspect/error.hpp"

namespace introspect {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config-error";
    case ErrorCode::kDimension: return "dimension-error";
    case ErrorCode::kNumeric: return "numeric-error";
    case ErrorCode::kContract: return "contract-error";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kCountMismatch: return "count-mismatch";
    case ErrorCode::kTruncated: return "truncated-file";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kChecksum: return "checksum-mismatch";
    case ErrorCode::kFormat: return "format-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kTraining: return "training-error";
    case ErrorCode::kMetricUndefined: return "metric-undefined";
    case ErrorCode::kDegenerateSample: return "degenerate-sample";
    case ErrorCode::kShortfall: return "dataset-shortfall";
    case ErrorCode::kStageDependency: return "stage-dependency";
    case ErrorCode::kStaleArtifact: return "stale-artifact";
    case ErrorCode::kInternal: return "internal-error";
  }
  return "internal-error";
}

int error_code_exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return 2;
    case ErrorCode::kStageDependency: return 3;
    case ErrorCode::kStaleArtifact: return 4;
    case ErrorCode::kBadMagic:
    case ErrorCode::kCountMismatch:
    case ErrorCode::kTruncated:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kChecksum:
    case ErrorCode::kFormat: return 5;
    case ErrorCode::kMetricUndefined:
    case ErrorCode::kDegenerateSample: return 6;
    case ErrorCode::kTraining: return 7;
    case ErrorCode::kIo: return 8;
    case ErrorCode::kShortfall: return 9;
    default: return 1;
  }
}

}  // namespace introspect
