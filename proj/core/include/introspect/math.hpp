#pragma once

#include <span>
#include <vector>

namespace introspect {

/// Stable softmax (max-subtraction). Entries are positive and sum to 1.
/// Requires K >= 2 and finite inputs.
std::vector<float> softmax(std::span<const float> logits);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(std::span<const float> values);

}  // namespace introspect
