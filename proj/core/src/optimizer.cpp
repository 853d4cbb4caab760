#include "introspect/optimizer.hpp"

#include <cmath>

#include "introspect/error.hpp"

namespace introspect {

void RmsPropState::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    raise(ErrorCode::kDimension, "rmsprop: " + std::to_string(params.size()) +
                                     " params but " + std::to_string(grads.size()) +
                                     " gradients");
  }
  if (mean_squares_.empty()) {
    mean_squares_.reserve(params.size());
    for (const Tensor* p : params) mean_squares_.push_back(Tensor::zeros(p->shape()));
  }
  if (mean_squares_.size() != params.size()) {
    raise(ErrorCode::kDimension, "rmsprop: parameter count changed between steps");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    Tensor& ms = mean_squares_[i];
    if (!p.same_shape(g) || !p.same_shape(ms)) {
      raise(ErrorCode::kDimension, "rmsprop: shape mismatch at parameter " + std::to_string(i) +
                                       ": param " + p.shape_str() + ", grad " + g.shape_str());
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      const float gj = g.at(j);
      ms.at(j) = config_.rho * ms.at(j) + (1.0f - config_.rho) * gj * gj;
      p.at(j) -= config_.learning_rate * gj / (std::sqrt(ms.at(j)) + config_.epsilon);
    }
  }
}

}  // namespace introspect
