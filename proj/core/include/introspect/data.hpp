#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "introspect/tensor.hpp"

namespace introspect {

/// Provenance of an example: the in-distribution source or one of the eight
/// misclassification datasets.
enum class DatasetTag {
  kInDist,
  kErrors,
  kFgsm,
  kBim,
  kDeepFool,
  kGaussianNoise,
  kUniformNoise,
  kCrossA,
  kCrossB,
};

inline constexpr DatasetTag kAllTags[] = {
    DatasetTag::kInDist,       DatasetTag::kErrors,       DatasetTag::kFgsm,
    DatasetTag::kBim,          DatasetTag::kDeepFool,     DatasetTag::kGaussianNoise,
    DatasetTag::kUniformNoise, DatasetTag::kCrossA,       DatasetTag::kCrossB,
};

const char* tag_name(DatasetTag tag);
/// Accepts canonical names plus common dataset aliases (case-insensitive):
/// mnist -> in_dist, cifar10/cifar-10 -> cross_a, fashion -> cross_b.
std::optional<DatasetTag> parse_tag(std::string_view text);
/// Noise and cross-dataset examples have no true class.
bool tag_is_unlabeled(DatasetTag tag);

struct LabeledExample {
  Tensor image;                   // HxWxC, entries in [0,1]
  std::optional<int> label;       // absent iff the tag is unlabeled
  DatasetTag tag = DatasetTag::kInDist;
};

/// Enforces the pixel range and the label/tag consistency rule.
void validate_example(const LabeledExample& example);

/// Batched inference interface used by the dataset generators so they stay
/// decoupled from the network: images in, predicted classes out.
using BatchPredictor = std::function<std::vector<int>(std::span<const Tensor>)>;

}  // namespace introspect
