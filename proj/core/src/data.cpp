#include "introspect/data.hpp"

#include <algorithm>
#include <cctype>

#include "introspect/error.hpp"

namespace introspect {

const char* tag_name(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kInDist: return "in_dist";
    case DatasetTag::kErrors: return "errors";
    case DatasetTag::kFgsm: return "fgsm";
    case DatasetTag::kBim: return "bim";
    case DatasetTag::kDeepFool: return "deepfool";
    case DatasetTag::kGaussianNoise: return "gaussian";
    case DatasetTag::kUniformNoise: return "uniform";
    case DatasetTag::kCrossA: return "cross_a";
    case DatasetTag::kCrossB: return "cross_b";
  }
  return "in_dist";
}

std::optional<DatasetTag> parse_tag(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "in_dist" || lower == "mnist") return DatasetTag::kInDist;
  if (lower == "errors") return DatasetTag::kErrors;
  if (lower == "fgsm") return DatasetTag::kFgsm;
  if (lower == "bim") return DatasetTag::kBim;
  if (lower == "deepfool") return DatasetTag::kDeepFool;
  if (lower == "gaussian" || lower == "gaussian_noise") return DatasetTag::kGaussianNoise;
  if (lower == "uniform" || lower == "uniform_noise") return DatasetTag::kUniformNoise;
  if (lower == "cross_a" || lower == "cifar10" || lower == "cifar-10") return DatasetTag::kCrossA;
  if (lower == "cross_b" || lower == "fashion") return DatasetTag::kCrossB;
  return std::nullopt;
}

bool tag_is_unlabeled(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kGaussianNoise:
    case DatasetTag::kUniformNoise:
    case DatasetTag::kCrossA:
    case DatasetTag::kCrossB:
      return true;
    default:
      return false;
  }
}

void validate_example(const LabeledExample& example) {
  for (std::size_t i = 0; i < example.image.size(); ++i) {
    const float v = example.image.at(i);
    if (!(v >= 0.0f && v <= 1.0f)) {
      raise(ErrorCode::kContract, std::string("example (") + tag_name(example.tag) +
                                      "): pixel " + std::to_string(i) + " = " +
                                      std::to_string(v) + " outside [0,1]");
    }
  }
  if (tag_is_unlabeled(example.tag) && example.label.has_value()) {
    raise(ErrorCode::kContract, std::string("example (") + tag_name(example.tag) +
                                    "): unlabeled dataset carries a true label");
  }
  if (!tag_is_unlabeled(example.tag) && !example.label.has_value()) {
    raise(ErrorCode::kContract, std::string("example (") + tag_name(example.tag) +
                                    "): labeled dataset is missing its true label");
  }
}

}  // namespace introspect
