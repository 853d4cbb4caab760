#include "introspect/math.hpp"

#include <cmath>
#include <string>

#include "introspect/error.hpp"

namespace introspect {

std::vector<float> softmax(std::span<const float> logits) {
  if (logits.size() < 2) {
    raise(ErrorCode::kDimension,
          "softmax: need at least 2 classes, got " + std::to_string(logits.size()));
  }
  float mx = logits[0];
  for (float v : logits) {
    if (!std::isfinite(v)) raise(ErrorCode::kNumeric, "softmax: non-finite logit");
    mx = std::max(mx, v);
  }
  std::vector<float> out(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    denom += out[i];
  }
  const float inv = static_cast<float>(1.0 / denom);
  for (float& v : out) v *= inv;
  return out;
}

int argmax(std::span<const float> values) {
  if (values.empty()) raise(ErrorCode::kContract, "argmax: empty input");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace introspect
