#pragma once

#include <stdexcept>
#include <string>

namespace introspect {

// One class per distinguishable failure mode; the CLI prints the class name
// as a machine-parseable token and maps it to the exit code.
enum class ErrorCode {
  kConfig,
  kDimension,
  kNumeric,
  kContract,
  kBadMagic,
  kCountMismatch,
  kTruncated,
  kVersionMismatch,
  kChecksum,
  kFormat,
  kIo,
  kTraining,
  kMetricUndefined,
  kDegenerateSample,
  kShortfall,
  kStageDependency,
  kStaleArtifact,
  kInternal,
};

const char* error_code_name(ErrorCode code);
int error_code_exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace introspect
