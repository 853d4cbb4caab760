#include "introspect/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "introspect/error.hpp"
#include "introspect/math.hpp"
#include "introspect/train.hpp"

namespace introspect {

namespace {

// Pull a batch row back out as a standalone image tensor.
Tensor unstack_row(const Tensor& batch, int row, const std::vector<int>& example_shape) {
  const std::size_t stride = shape_product(example_shape);
  std::vector<float> data(batch.data() + row * stride, batch.data() + (row + 1) * stride);
  return Tensor(example_shape, std::move(data));
}

// Clamp candidate pixels so the float-evaluated difference to the source
// never exceeds eps: float rounding of x+eps can overshoot by an ulp, so
// after the arithmetic clip we walk at most a couple of ulps back toward the
// source until the budget predicate itself holds.
void enforce_budget(float* candidate, const float* source, std::size_t n, float eps) {
  for (std::size_t i = 0; i < n; ++i) {
    float v = std::clamp(candidate[i], 0.0f, 1.0f);
    v = std::clamp(v, source[i] - eps, source[i] + eps);
    while (v - source[i] > eps || source[i] - v > eps) {
      v = std::nextafterf(v, source[i]);
    }
    candidate[i] = v;
  }
}

}  // namespace

Tensor input_gradient(const Model& model, const Tensor& batch, std::span<const int> labels) {
  Model& m = const_cast<Model&>(model);  // inference forward does not mutate
  Tape tape;
  ValueId input = tape.leaf(batch, true);
  ForwardOptions opt;  // inference mode
  ValueId logits = m.forward(tape, input, opt);
  ValueId loss = tape.softmax_cross_entropy(logits, labels);
  ValueId wrt[] = {input};
  return tape.gradients(loss, wrt)[0];
}

std::vector<Tensor> bim_batch(const Model& model, std::span<const Tensor> images,
                              std::span<const int> true_labels, const AttackConfig& config) {
  if (images.size() != true_labels.size()) {
    raise(ErrorCode::kContract, "bim: image and label counts differ");
  }
  if (config.epsilon < 0.0f) raise(ErrorCode::kConfig, "bim: epsilon must be >= 0");
  if (config.iterations < 1) raise(ErrorCode::kConfig, "bim: iterations must be >= 1");
  if (images.empty()) return {};

  const std::vector<int> example_shape = images[0].shape();
  const Tensor source = stack_images(images);
  Tensor current = source;
  const std::vector<int> labels(true_labels.begin(), true_labels.end());

  for (int it = 0; it < config.iterations; ++it) {
    const Tensor grad = input_gradient(model, current, labels);
    for (std::size_t i = 0; i < current.size(); ++i) {
      const float g = grad.at(i);
      const float step = g > 0.0f ? config.alpha : (g < 0.0f ? -config.alpha : 0.0f);
      current.at(i) += step;
    }
    enforce_budget(current.data(), source.data(), current.size(), config.epsilon);
  }

  std::vector<Tensor> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back(unstack_row(current, static_cast<int>(i), example_shape));
  }
  return out;
}

std::vector<Tensor> fgsm_batch(const Model& model, std::span<const Tensor> images,
                               std::span<const int> true_labels, float epsilon) {
  AttackConfig cfg;
  cfg.epsilon = epsilon;
  cfg.alpha = epsilon;
  cfg.iterations = 1;
  return bim_batch(model, images, true_labels, cfg);
}

Tensor fgsm(const Model& model, const Tensor& image, int true_label, float epsilon) {
  const Tensor imgs[] = {image};
  const int labels[] = {true_label};
  return fgsm_batch(model, imgs, labels, epsilon)[0];
}

Tensor bim(const Model& model, const Tensor& image, int true_label, const AttackConfig& config) {
  const Tensor imgs[] = {image};
  const int labels[] = {true_label};
  return bim_batch(model, imgs, labels, config)[0];
}

DeepFoolResult deepfool(const Model& model, const Tensor& image, const AttackConfig& config) {
  if (config.overshoot < 0.0f) raise(ErrorCode::kConfig, "deepfool: overshoot must be >= 0");
  if (config.max_iter < 1) raise(ErrorCode::kConfig, "deepfool: max_iter must be >= 1");

  Model& m = const_cast<Model&>(model);
  const int k = model.spec().class_count();
  const float grow = 1.0f + config.overshoot;

  Tensor r_total = Tensor::zeros(image.shape());
  Tensor current = image;
  int k0 = -1;

  DeepFoolResult result;
  while (result.iterations < config.max_iter) {
    Tape tape;
    ValueId input = tape.leaf(current, true);
    ForwardOptions opt;  // inference
    ValueId logits = m.forward(tape, input, opt);
    const Tensor& lv = tape.value(logits);  // [1,K]
    const int k_cur = argmax(lv.values());
    if (k0 < 0) {
      k0 = k_cur;
    } else if (k_cur != k0) {
      result.converged = true;
      break;
    }

    // One backward pass per class.
    std::vector<Tensor> class_grads;
    class_grads.reserve(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) {
      ValueId picked = tape.pick(logits, static_cast<std::size_t>(l));
      ValueId wrt[] = {input};
      class_grads.push_back(tape.gradients(picked, wrt)[0]);
    }

    int best_class = -1;
    double best_ratio = 0.0;
    double best_fdiff = 0.0;
    double best_wnorm2 = 0.0;
    for (int l = 0; l < k; ++l) {
      if (l == k0) continue;
      double wnorm2 = 0.0;
      for (std::size_t i = 0; i < class_grads[static_cast<std::size_t>(l)].size(); ++i) {
        const double w = static_cast<double>(class_grads[static_cast<std::size_t>(l)].at(i)) -
                         class_grads[static_cast<std::size_t>(k0)].at(i);
        wnorm2 += w * w;
      }
      if (wnorm2 < 1e-20) continue;
      const double fdiff = static_cast<double>(lv.at(static_cast<std::size_t>(l))) -
                           lv.at(static_cast<std::size_t>(k0));
      const double ratio = std::abs(fdiff) / std::sqrt(wnorm2);
      if (best_class < 0 || ratio < best_ratio) {
        best_class = l;
        best_ratio = ratio;
        best_fdiff = fdiff;
        best_wnorm2 = wnorm2;
      }
    }
    if (best_class < 0) break;  // all boundaries degenerate; give up

    ++result.iterations;
    const double scale = std::abs(best_fdiff) / best_wnorm2;
    for (std::size_t i = 0; i < r_total.size(); ++i) {
      const double w = static_cast<double>(class_grads[static_cast<std::size_t>(best_class)].at(i)) -
                       class_grads[static_cast<std::size_t>(k0)].at(i);
      r_total.at(i) += static_cast<float>(scale * w);
    }
    for (std::size_t i = 0; i < current.size(); ++i) {
      current.at(i) = image.at(i) + grow * r_total.at(i);
    }
  }

  if (!result.converged && result.iterations >= config.max_iter) {
    // Final position may have crossed on the last step.
    const Tensor logits = predict_logits(model, stack_images(std::span<const Tensor>(&current, 1)));
    result.converged = argmax(logits.values()) != k0;
  }

  for (std::size_t i = 0; i < current.size(); ++i) {
    current.at(i) = std::clamp(current.at(i), 0.0f, 1.0f);
  }
  result.image = std::move(current);
  return result;
}

std::vector<DeepFoolResult> deepfool_batch(const Model& model, std::span<const Tensor> images,
                                           const AttackConfig& config) {
  std::vector<DeepFoolResult> out(images.size());
  const int n = static_cast<int>(images.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = deepfool(model, images[static_cast<std::size_t>(i)], config);
  }
  return out;
}

std::vector<LabeledExample> filter_misclassified(const BatchPredictor& predictor,
                                                 std::vector<LabeledExample> candidates,
                                                 double* retention_rate) {
  for (const LabeledExample& e : candidates) {
    if (!e.label) raise(ErrorCode::kContract, "filter_misclassified: candidate without label");
  }
  std::vector<Tensor> images;
  images.reserve(candidates.size());
  for (const LabeledExample& e : candidates) images.push_back(e.image);
  const std::vector<int> preds = candidates.empty() ? std::vector<int>{} : predictor(images);
  if (preds.size() != candidates.size()) {
    raise(ErrorCode::kContract, "filter_misclassified: predictor returned wrong count");
  }

  std::vector<LabeledExample> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (preds[i] != *candidates[i].label) kept.push_back(std::move(candidates[i]));
  }
  if (retention_rate) {
    *retention_rate = candidates.empty()
                          ? 0.0
                          : static_cast<double>(kept.size()) / static_cast<double>(candidates.size());
  }
  return kept;
}

}  // namespace introspect
