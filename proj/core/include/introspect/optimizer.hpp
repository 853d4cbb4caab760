#pragma once

#include <span>
#include <vector>

#include "introspect/tensor.hpp"

namespace introspect {

struct RmsPropConfig {
  float learning_rate = 0.001f;
  float rho = 0.9f;
  float epsilon = 1e-7f;
};

/// ms <- rho*ms + (1-rho)*g^2 ; p <- p - lr*g/(sqrt(ms)+eps)
/// Mean-square accumulators are created lazily on the first step and stay
/// non-negative for any gradient sequence.
class RmsPropState {
 public:
  explicit RmsPropState(RmsPropConfig config = {}) : config_(config) {}

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

  const RmsPropConfig& config() const { return config_; }
  const std::vector<Tensor>& mean_squares() const { return mean_squares_; }

 private:
  RmsPropConfig config_;
  std::vector<Tensor> mean_squares_;
};

}  // namespace introspect
