#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "introspect/rng.hpp"
#include "introspect/tape.hpp"
#include "introspect/tensor.hpp"

namespace introspect {

enum class Activation { kNone, kRelu, kSoftmax };

/// One architecture row: kind plus the fields that kind uses.
struct LayerDesc {
  enum class Kind { kConv, kMaxPool, kDropout, kDense, kBatchNorm, kFlatten };

  Kind kind;
  int patch = 0;        // conv kernel side
  int stride = 1;       // conv
  int depth = 0;        // conv output channels
  Padding padding = Padding::kValid;
  Activation activation = Activation::kNone;
  float dropout_rate = 0.0f;
  int width = 0;        // dense

  static LayerDesc conv(int patch, int stride, int depth, Padding padding, Activation act);
  static LayerDesc maxpool();
  static LayerDesc dropout(float rate);
  static LayerDesc dense(int width, Activation act);
  static LayerDesc batchnorm();
  static LayerDesc flatten();
};

/// Ordered layer descriptors plus the input shape they chain from. The final
/// dense layer's width is the class count; a kSoftmax activation there marks
/// the probability head, but the network's outputs are always the
/// pre-softmax logits.
struct ModelSpec {
  std::vector<int> input_shape;
  std::vector<LayerDesc> layers;

  /// Per-layer output shapes (without batch axis); validates chaining and
  /// throws kConfig/kDimension on an inconsistent stack.
  std::vector<std::vector<int>> output_shapes() const;
  int class_count() const;
  /// Trainable scalars: conv/dense weights and biases, batchnorm gamma/beta.
  std::size_t param_count() const;
};

/// The architecture used for the MNIST experiments: five valid/same 3x3
/// convolutions with two 2x2 poolings, a 128-wide dense layer with batch
/// normalization, and a 10-way head.
ModelSpec table1_classifier();

struct DeskClassifierConfig {
  std::vector<int> input_shape{32, 32, 3};
  std::vector<int> conv_widths{32, 64};  // one 3x3 same conv + maxpool per entry
  int dense_width = 128;
  int class_count = 10;
  float dropout_rate = 0.25f;
};

/// Compact stand-in classifier for 32x32x3-scale inputs (or any other shape
/// given in the config).
ModelSpec desk_classifier(const DeskClassifierConfig& config);

/// Named parameter tensors in deterministic order, including batchnorm
/// running statistics (names ending in `.running_mean` / `.running_var`,
/// which are not trainable).
struct Weights {
  std::uint32_t version = 1;
  std::vector<std::pair<std::string, Tensor>> entries;

  Tensor* find(std::string_view name);
  const Tensor* find(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool operator==(const Weights& other) const;
};

struct ForwardOptions {
  bool training = false;
  bool params_require_grad = false;
  SeededRng* dropout_rng = nullptr;
};

/// Architecture plus its weights; forward passes are recorded on a caller
/// owned tape so the same model serves training, inference and input
/// gradient queries.
class Model {
 public:
  explicit Model(ModelSpec spec);
  Model(ModelSpec spec, Weights weights);

  /// He-scaled normal init for conv/dense kernels, zeros for biases,
  /// (gamma,beta)=(1,0) and (mean,var)=(0,1) for batchnorm.
  void init_weights(SeededRng& rng);

  /// Records the whole network on `tape` starting from `input` (a single
  /// example shaped like spec().input_shape, or a batch with a leading N
  /// axis) and returns the logits node. `param_ids`, when given, receives
  /// the tape ids of the trainable parameters in trainable_param_names()
  /// order. Training mode mutates batchnorm running statistics.
  ValueId forward(Tape& tape, ValueId input, const ForwardOptions& options,
                  std::vector<ValueId>* param_ids = nullptr);

  const ModelSpec& spec() const { return spec_; }
  Weights& weights() { return weights_; }
  const Weights& weights() const { return weights_; }
  std::vector<std::string> trainable_param_names() const;

 private:
  ModelSpec spec_;
  Weights weights_;
  std::vector<std::string> layer_prefixes_;  // per layer, empty if stateless
};

/// Inference-mode logits for a batch [N, ...input shape]; pure in
/// (weights, batch). Rows follow batch order; internally chunked.
Tensor predict_logits(const Model& model, const Tensor& batch);

/// Argmax per row with lowest-index tie break.
std::vector<int> predicted_classes(const Tensor& logits_nk);

}  // namespace introspect
