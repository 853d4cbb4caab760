#pragma once

#include <span>
#include <vector>

#include "introspect/data.hpp"
#include "introspect/model.hpp"

namespace introspect {

struct AttackConfig {
  float epsilon = 0.3f;   // infinity-norm budget (FGSM/BIM)
  float alpha = 0.05f;    // BIM step size
  int iterations = 10;    // BIM steps
  float overshoot = 0.02f;  // DeepFool boundary overshoot
  int max_iter = 50;        // DeepFool iteration cap
};

/// Single-step sign-of-gradient attack under an exact infinity-norm budget:
/// every pixel of the result differs from the source by at most epsilon in
/// float32 arithmetic, and the result stays in [0,1]. Equivalent, bit for
/// bit, to bim() with iterations=1 and alpha=epsilon.
Tensor fgsm(const Model& model, const Tensor& image, int true_label, float epsilon);

/// Iterated FGSM with per-step projection into the epsilon ball and pixel
/// range.
Tensor bim(const Model& model, const Tensor& image, int true_label, const AttackConfig& config);

std::vector<Tensor> fgsm_batch(const Model& model, std::span<const Tensor> images,
                               std::span<const int> true_labels, float epsilon);
std::vector<Tensor> bim_batch(const Model& model, std::span<const Tensor> images,
                              std::span<const int> true_labels, const AttackConfig& config);

struct DeepFoolResult {
  Tensor image;
  bool converged = false;  // model's argmax flipped within max_iter
  int iterations = 0;
};

/// Iterative minimal-perturbation attack: per step, linearize every decision
/// boundary against the current prediction, move to the nearest one, and
/// stop once the model's argmax changes; the accumulated perturbation is
/// scaled by (1+overshoot). Non-convergence returns the best effort with
/// converged=false.
DeepFoolResult deepfool(const Model& model, const Tensor& image, const AttackConfig& config);

/// Runs deepfool across examples in parallel (one tape per example).
std::vector<DeepFoolResult> deepfool_batch(const Model& model, std::span<const Tensor> images,
                                           const AttackConfig& config);

/// Keeps exactly the candidates whose predicted class differs from their
/// true label; sets *retention_rate to kept/total when requested.
std::vector<LabeledExample> filter_misclassified(const BatchPredictor& predictor,
                                                 std::vector<LabeledExample> candidates,
                                                 double* retention_rate = nullptr);

/// d(mean CE)/d(input) for a batch at fixed weights, inference mode.
Tensor input_gradient(const Model& model, const Tensor& batch, std::span<const int> labels);

}  // namespace introspect
