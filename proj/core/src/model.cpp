#include "introspect/model.hpp"

#include <cmath>

#include "introspect/error.hpp"
#include "introspect/math.hpp"
#include "kernels.hpp"

namespace introspect {

LayerDesc LayerDesc::conv(int patch, int stride, int depth, Padding padding, Activation act) {
  LayerDesc d;
  d.kind = Kind::kConv;
  d.patch = patch;
  d.stride = stride;
  d.depth = depth;
  d.padding = padding;
  d.activation = act;
  return d;
}

LayerDesc LayerDesc::maxpool() {
  LayerDesc d;
  d.kind = Kind::kMaxPool;
  return d;
}

LayerDesc LayerDesc::dropout(float rate) {
  LayerDesc d;
  d.kind = Kind::kDropout;
  d.dropout_rate = rate;
  return d;
}

LayerDesc LayerDesc::dense(int width, Activation act) {
  LayerDesc d;
  d.kind = Kind::kDense;
  d.width = width;
  d.activation = act;
  return d;
}

LayerDesc LayerDesc::batchnorm() {
  LayerDesc d;
  d.kind = Kind::kBatchNorm;
  return d;
}

LayerDesc LayerDesc::flatten() {
  LayerDesc d;
  d.kind = Kind::kFlatten;
  return d;
}

std::vector<std::vector<int>> ModelSpec::output_shapes() const {
  if (layers.empty()) raise(ErrorCode::kConfig, "model spec: no layers");
  std::vector<std::vector<int>> out;
  out.reserve(layers.size());
  std::vector<int> cur = input_shape;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const LayerDesc& l = layers[li];
    switch (l.kind) {
      case LayerDesc::Kind::kConv: {
        if (cur.size() != 3) {
          raise(ErrorCode::kConfig, "model spec: conv at layer " + std::to_string(li) +
                                        " needs an HxWxC input, got " + shape_to_string(cur));
        }
        const auto dims = detail::conv2d_dims(
            cur, {l.patch, l.patch, cur[2], l.depth}, l.stride,
            l.padding == Padding::kValid ? detail::Padding::kValid : detail::Padding::kSame);
        cur = {dims.out_h, dims.out_w, dims.out_c};
        break;
      }
      case LayerDesc::Kind::kMaxPool: {
        if (cur.size() != 3 || cur[0] < 2 || cur[1] < 2) {
          raise(ErrorCode::kConfig, "model spec: maxpool at layer " + std::to_string(li) +
                                        " needs an HxWxC input with H,W >= 2");
        }
        cur = {cur[0] / 2, cur[1] / 2, cur[2]};
        break;
      }
      case LayerDesc::Kind::kDropout:
        break;
      case LayerDesc::Kind::kFlatten: {
        cur = {static_cast<int>(shape_product(cur))};
        break;
      }
      case LayerDesc::Kind::kDense: {
        if (cur.size() != 1) {
          raise(ErrorCode::kConfig, "model spec: dense at layer " + std::to_string(li) +
                                        " needs a flat input, got " + shape_to_string(cur));
        }
        cur = {l.width};
        break;
      }
      case LayerDesc::Kind::kBatchNorm: {
        if (cur.size() != 1) {
          raise(ErrorCode::kConfig, "model spec: batchnorm at layer " + std::to_string(li) +
                                        " needs a flat input, got " + shape_to_string(cur));
        }
        break;
      }
    }
    out.push_back(cur);
  }
  return out;
}

int ModelSpec::class_count() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerDesc::Kind::kDense) return it->width;
  }
  raise(ErrorCode::kConfig, "model spec: no dense layer to read the class count from");
}

std::size_t ModelSpec::param_count() const {
  const auto shapes = output_shapes();
  std::vector<int> cur = input_shape;
  std::size_t count = 0;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const LayerDesc& l = layers[li];
    switch (l.kind) {
      case LayerDesc::Kind::kConv:
        count += static_cast<std::size_t>(l.patch) * l.patch * cur[2] * l.depth + l.depth;
        break;
      case LayerDesc::Kind::kDense:
        count += static_cast<std::size_t>(cur[0]) * l.width + l.width;
        break;
      case LayerDesc::Kind::kBatchNorm:
        count += 2 * static_cast<std::size_t>(cur[0]);
        break;
      default:
        break;
    }
    cur = shapes[li];
  }
  return count;
}

ModelSpec table1_classifier() {
  ModelSpec spec;
  spec.input_shape = {28, 28, 1};
  spec.layers = {
      LayerDesc::conv(3, 1, 32, Padding::kValid, Activation::kRelu),
      LayerDesc::conv(3, 1, 32, Padding::kValid, Activation::kRelu),
      LayerDesc::maxpool(),
      LayerDesc::dropout(0.20f),
      LayerDesc::conv(3, 1, 64, Padding::kSame, Activation::kRelu),
      LayerDesc::conv(3, 1, 64, Padding::kSame, Activation::kRelu),
      LayerDesc::maxpool(),
      LayerDesc::dropout(0.25f),
      LayerDesc::conv(3, 1, 128, Padding::kSame, Activation::kRelu),
      LayerDesc::dropout(0.25f),
      LayerDesc::flatten(),
      LayerDesc::dense(128, Activation::kRelu),
      LayerDesc::batchnorm(),
      LayerDesc::dropout(0.25f),
      LayerDesc::dense(10, Activation::kSoftmax),
  };
  return spec;
}

ModelSpec desk_classifier(const DeskClassifierConfig& config) {
  if (config.input_shape.size() != 3) {
    raise(ErrorCode::kConfig, "desk classifier: input shape must be HxWxC, got " +
                                  shape_to_string(config.input_shape));
  }
  if (config.conv_widths.empty()) {
    raise(ErrorCode::kConfig, "desk classifier: need at least one conv width");
  }
  if (config.class_count < 2) {
    raise(ErrorCode::kConfig, "desk classifier: class count must be >= 2");
  }
  ModelSpec spec;
  spec.input_shape = config.input_shape;
  int h = config.input_shape[0], w = config.input_shape[1];
  for (int width : config.conv_widths) {
    if (width <= 0) raise(ErrorCode::kConfig, "desk classifier: conv width must be positive");
    spec.layers.push_back(LayerDesc::conv(3, 1, width, Padding::kSame, Activation::kRelu));
    if (h < 2 || w < 2) {
      raise(ErrorCode::kConfig, "desk classifier: too many pooling stages for input " +
                                    shape_to_string(config.input_shape));
    }
    spec.layers.push_back(LayerDesc::maxpool());
    h /= 2;
    w /= 2;
  }
  if (config.dropout_rate > 0.0f) {
    spec.layers.push_back(LayerDesc::dropout(config.dropout_rate));
  }
  spec.layers.push_back(LayerDesc::flatten());
  if (config.dense_width > 0) {
    spec.layers.push_back(LayerDesc::dense(config.dense_width, Activation::kRelu));
  }
  spec.layers.push_back(LayerDesc::dense(config.class_count, Activation::kSoftmax));
  spec.output_shapes();  // validate the chain now
  return spec;
}

Tensor* Weights::find(std::string_view name) {
  for (auto& [n, t] : entries) {
    if (n == name) return &t;
  }
  return nullptr;
}

const Tensor* Weights::find(std::string_view name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return &t;
  }
  return nullptr;
}

Tensor& Weights::at(std::string_view name) {
  Tensor* t = find(name);
  if (!t) raise(ErrorCode::kContract, "weights: no entry named '" + std::string(name) + "'");
  return *t;
}

const Tensor& Weights::at(std::string_view name) const {
  const Tensor* t = find(name);
  if (!t) raise(ErrorCode::kContract, "weights: no entry named '" + std::string(name) + "'");
  return *t;
}

bool Weights::operator==(const Weights& other) const {
  if (version != other.version || entries.size() != other.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != other.entries[i].first) return false;
    if (!entries[i].second.same_shape(other.entries[i].second)) return false;
    for (std::size_t j = 0; j < entries[i].second.size(); ++j) {
      if (entries[i].second.at(j) != other.entries[i].second.at(j)) return false;
    }
  }
  return true;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.output_shapes();  // validate
  int conv_n = 0, dense_n = 0, bn_n = 0;
  for (const LayerDesc& l : spec_.layers) {
    switch (l.kind) {
      case LayerDesc::Kind::kConv:
        layer_prefixes_.push_back("conv" + std::to_string(++conv_n));
        break;
      case LayerDesc::Kind::kDense:
        layer_prefixes_.push_back("dense" + std::to_string(++dense_n));
        break;
      case LayerDesc::Kind::kBatchNorm:
        layer_prefixes_.push_back("bn" + std::to_string(++bn_n));
        break;
      default:
        layer_prefixes_.emplace_back();
        break;
    }
  }
}

Model::Model(ModelSpec spec, Weights weights) : Model(std::move(spec)) {
  weights_ = std::move(weights);
  for (const std::string& name : trainable_param_names()) {
    if (!weights_.find(name)) {
      raise(ErrorCode::kContract, "model: weights are missing entry '" + name + "'");
    }
  }
}

std::vector<std::string> Model::trainable_param_names() const {
  std::vector<std::string> names;
  for (std::size_t li = 0; li < spec_.layers.size(); ++li) {
    const LayerDesc& l = spec_.layers[li];
    const std::string& p = layer_prefixes_[li];
    switch (l.kind) {
      case LayerDesc::Kind::kConv:
        names.push_back(p + ".kernel");
        names.push_back(p + ".bias");
        break;
      case LayerDesc::Kind::kDense:
        names.push_back(p + ".weight");
        names.push_back(p + ".bias");
        break;
      case LayerDesc::Kind::kBatchNorm:
        names.push_back(p + ".gamma");
        names.push_back(p + ".beta");
        break;
      default:
        break;
    }
  }
  return names;
}

void Model::init_weights(SeededRng& rng) {
  weights_.entries.clear();
  const auto shapes = spec_.output_shapes();
  std::vector<int> cur = spec_.input_shape;
  for (std::size_t li = 0; li < spec_.layers.size(); ++li) {
    const LayerDesc& l = spec_.layers[li];
    const std::string& p = layer_prefixes_[li];
    switch (l.kind) {
      case LayerDesc::Kind::kConv: {
        const int fan_in = l.patch * l.patch * cur[2];
        const float stddev = std::sqrt(2.0f / static_cast<float>(fan_in));
        Tensor kernel({l.patch, l.patch, cur[2], l.depth});
        for (std::size_t i = 0; i < kernel.size(); ++i) kernel.at(i) = rng.normal(0.0f, stddev);
        weights_.entries.emplace_back(p + ".kernel", std::move(kernel));
        weights_.entries.emplace_back(p + ".bias", Tensor::zeros({l.depth}));
        break;
      }
      case LayerDesc::Kind::kDense: {
        const int fan_in = cur[0];
        const float stddev = std::sqrt(2.0f / static_cast<float>(fan_in));
        Tensor weight({fan_in, l.width});
        for (std::size_t i = 0; i < weight.size(); ++i) weight.at(i) = rng.normal(0.0f, stddev);
        weights_.entries.emplace_back(p + ".weight", std::move(weight));
        weights_.entries.emplace_back(p + ".bias", Tensor::zeros({l.width}));
        break;
      }
      case LayerDesc::Kind::kBatchNorm: {
        const int f = cur[0];
        weights_.entries.emplace_back(p + ".gamma", Tensor::full({f}, 1.0f));
        weights_.entries.emplace_back(p + ".beta", Tensor::zeros({f}));
        weights_.entries.emplace_back(p + ".running_mean", Tensor::zeros({f}));
        weights_.entries.emplace_back(p + ".running_var", Tensor::full({f}, 1.0f));
        break;
      }
      default:
        break;
    }
    cur = shapes[li];
  }
}

ValueId Model::forward(Tape& tape, ValueId input, const ForwardOptions& options,
                       std::vector<ValueId>* param_ids) {
  if (param_ids) param_ids->clear();
  const Tensor& in = tape.value(input);
  const int expected_rank = static_cast<int>(spec_.input_shape.size());
  const bool batched = in.rank() == expected_rank + 1;
  if (!batched && in.rank() != expected_rank) {
    raise(ErrorCode::kDimension, "model forward: input " + in.shape_str() +
                                     " does not match spec input " +
                                     shape_to_string(spec_.input_shape));
  }
  for (int i = 0; i < expected_rank; ++i) {
    const int got = in.dim(i + (batched ? 1 : 0));
    if (got != spec_.input_shape[static_cast<std::size_t>(i)]) {
      raise(ErrorCode::kDimension, "model forward: input " + in.shape_str() +
                                       " does not match spec input " +
                                       shape_to_string(spec_.input_shape) + " at axis " +
                                       std::to_string(i));
    }
  }

  auto bind = [&](const std::string& name) {
    ValueId id = tape.leaf(weights_.at(name), options.params_require_grad);
    if (param_ids) param_ids->push_back(id);
    return id;
  };

  ValueId cur = input;
  for (std::size_t li = 0; li < spec_.layers.size(); ++li) {
    const LayerDesc& l = spec_.layers[li];
    const std::string& p = layer_prefixes_[li];
    switch (l.kind) {
      case LayerDesc::Kind::kConv: {
        ValueId kernel = bind(p + ".kernel");
        ValueId bias = bind(p + ".bias");
        cur = tape.conv2d(cur, kernel, l.stride, l.padding);
        cur = tape.bias_add(cur, bias);
        if (l.activation == Activation::kRelu) cur = tape.relu(cur);
        break;
      }
      case LayerDesc::Kind::kMaxPool:
        cur = tape.maxpool2x2(cur);
        break;
      case LayerDesc::Kind::kDropout:
        cur = tape.dropout(cur, l.dropout_rate, options.training, options.dropout_rng);
        break;
      case LayerDesc::Kind::kFlatten:
        cur = tape.flatten(cur, batched);
        break;
      case LayerDesc::Kind::kDense: {
        ValueId weight = bind(p + ".weight");
        ValueId bias = bind(p + ".bias");
        if (tape.value(cur).rank() == 1) {
          cur = tape.reshape(cur, {1, tape.value(cur).dim(0)});
        }
        cur = tape.matmul(cur, weight);
        cur = tape.bias_add(cur, bias);
        if (l.activation == Activation::kRelu) cur = tape.relu(cur);
        break;
      }
      case LayerDesc::Kind::kBatchNorm: {
        ValueId gamma = bind(p + ".gamma");
        ValueId beta = bind(p + ".beta");
        BatchNormOptions bn;
        bn.training = options.training;
        if (tape.value(cur).rank() == 1) {
          cur = tape.reshape(cur, {1, tape.value(cur).dim(0)});
        }
        cur = tape.batchnorm(cur, gamma, beta, weights_.at(p + ".running_mean"),
                             weights_.at(p + ".running_var"), bn);
        break;
      }
    }
  }
  return cur;
}

Tensor predict_logits(const Model& model, const Tensor& batch) {
  const int expected_rank = static_cast<int>(model.spec().input_shape.size());
  if (batch.rank() != expected_rank + 1) {
    raise(ErrorCode::kDimension, "predict_logits: expected batched input [N, ...], got " +
                                     batch.shape_str());
  }
  const int n = batch.dim(0);
  const int k = model.spec().class_count();
  const std::size_t example_size = batch.size() / static_cast<std::size_t>(n);
  Tensor out({n, k});

  // Chunk to bound tape memory; chunk size does not change per-row results
  // because batchnorm uses running statistics at inference.
  const int chunk = 256;
  Model& m = const_cast<Model&>(model);  // inference does not mutate weights
  for (int start = 0; start < n; start += chunk) {
    const int count = std::min(chunk, n - start);
    std::vector<int> shape = {count};
    for (int i = 0; i < expected_rank; ++i) shape.push_back(batch.dim(i + 1));
    std::vector<float> data(batch.data() + start * example_size,
                            batch.data() + (start + count) * example_size);
    Tape tape;
    ValueId input = tape.leaf(Tensor(std::move(shape), std::move(data)), false);
    ForwardOptions opt;  // inference
    ValueId logits = m.forward(tape, input, opt);
    const Tensor& lv = tape.value(logits);
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < k; ++j) {
        out.at(static_cast<std::size_t>(start + i) * k + j) =
            lv.at(static_cast<std::size_t>(i) * k + j);
      }
    }
  }
  return out;
}

std::vector<int> predicted_classes(const Tensor& logits_nk) {
  if (logits_nk.rank() != 2) {
    raise(ErrorCode::kDimension, "predicted_classes: expected [N,K] logits");
  }
  const int n = logits_nk.dim(0), k = logits_nk.dim(1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        argmax(std::span<const float>(logits_nk.data() + static_cast<std::size_t>(i) * k,
                                      static_cast<std::size_t>(k)));
  }
  return out;
}

}  // namespace introspect
