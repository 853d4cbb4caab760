#pragma once

#include <functional>
#include <span>
#include <vector>

#include "introspect/rng.hpp"
#include "introspect/tensor.hpp"

namespace introspect {

using ValueId = int;

enum class Padding { kValid, kSame };

struct BatchNormOptions {
  float momentum = 0.99f;
  float epsilon = 1e-3f;
  bool training = false;
};

/// Reverse-mode tape. Every op records its node in topological order
/// (operands always precede their consumers) together with the forward
/// values its backward pass needs. One tape is single-writer; distinct
/// tapes are independent and may live on distinct threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  ValueId leaf(Tensor value, bool requires_grad = false);
  ValueId constant(Tensor value) { return leaf(std::move(value), false); }

  ValueId add(ValueId a, ValueId b);
  ValueId sub(ValueId a, ValueId b);
  ValueId mul(ValueId a, ValueId b);
  ValueId scale(ValueId a, float s);
  ValueId square(ValueId a);
  ValueId relu(ValueId a);

  /// [M,K] x [K,N] -> [M,N]
  ValueId matmul(ValueId a, ValueId b);
  /// x[..., D] + bias[D]
  ValueId bias_add(ValueId x, ValueId bias);
  /// input HxWxC or NxHxWxC, kernels khxkwxCxD.
  ValueId conv2d(ValueId input, ValueId kernels, int stride, Padding padding);
  ValueId maxpool2x2(ValueId x);
  /// Bernoulli keep-mask scaled by 1/keep_prob while training; identity at
  /// inference. rng must outlive the forward call only.
  ValueId dropout(ValueId x, float rate, bool training, SeededRng* rng);
  /// x is [N,F]. Training mode normalizes with batch statistics and folds
  /// them into the running accumulators; inference uses the running stats.
  ValueId batchnorm(ValueId x, ValueId gamma, ValueId beta, Tensor& running_mean,
                    Tensor& running_var, const BatchNormOptions& opt);
  /// Reshape to [N, rest] (keep_batch) or [numel].
  ValueId flatten(ValueId x, bool keep_batch);
  /// Same data, new shape (element counts must agree).
  ValueId reshape(ValueId x, std::vector<int> shape);

  ValueId sum_all(ValueId a);
  ValueId mean_all(ValueId a);
  /// Scalar view of one element; DeepFool differentiates single logits.
  ValueId pick(ValueId a, std::size_t flat_index);

  /// Mean cross-entropy of softmax(logits) against integer labels;
  /// logits [N,K] or [K]. Fused for numerical stability.
  ValueId softmax_cross_entropy(ValueId logits, std::span<const int> labels);
  /// Mean squared error against fixed targets (same element count).
  ValueId mse(ValueId pred, Tensor targets);

  const Tensor& value(ValueId id) const;
  bool requires_grad(ValueId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  /// d(loss)/d(wrt_i) for a scalar loss node. Nodes that do not influence
  /// the loss get zero gradients. May be called repeatedly on one tape.
  std::vector<Tensor> gradients(ValueId loss, std::span<const ValueId> wrt);

 private:
  struct Node {
    Tensor value;
    bool needs_grad = false;
    std::function<void(Tape&, ValueId)> backward;
  };

  ValueId emit(Tensor value, bool needs_grad, std::function<void(Tape&, ValueId)> backward);
  Tensor& grad_buffer(ValueId id);
  bool grad_seeded(ValueId id) const;
  const Node& node(ValueId id) const;
  void check_id(ValueId id) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

}  // namespace introspect
