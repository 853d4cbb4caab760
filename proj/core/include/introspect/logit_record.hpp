#pragma once

#include <optional>
#include <vector>

#include "introspect/data.hpp"

namespace introspect {

/// One classifier prediction: the interchange unit between the classifier
/// stage and the detectors. `predicted` is always the argmax of `logits`
/// (lowest index on ties); `correct` is 1 only for labeled examples whose
/// prediction matched.
struct LogitRecord {
  std::vector<float> logits;
  int predicted = 0;
  std::optional<int> true_label;
  bool correct = false;
  DatasetTag tag = DatasetTag::kInDist;
};

/// Builds a record from raw logits, computing predicted and correct.
LogitRecord make_logit_record(DatasetTag tag, std::vector<float> logits,
                              std::optional<int> true_label);

/// Rejects records whose invariants do not hold (predicted != argmax,
/// correct bit inconsistent with the label, non-finite logits).
void validate_record(const LogitRecord& record);

}  // namespace introspect
