#pragma once

#include <cstdint>
#include <vector>

#include "introspect/augment.hpp"
#include "introspect/data.hpp"
#include "introspect/model.hpp"
#include "introspect/optimizer.hpp"

namespace introspect {

struct TrainPlan {
  int epochs = 1;
  int batch_size = 64;
  RmsPropConfig optimizer;
  AugmentConfig augment;  // all-zero ranges disable augmentation
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct EpochStats {
  float loss = 0.0f;      // mean cross-entropy over the epoch's batches
  float accuracy = 0.0f;  // fraction of batch predictions that were correct
};

struct TrainResult {
  std::vector<EpochStats> history;
};

/// Mini-batch RMSProp training with per-epoch shuffling and per-example
/// augmentation, all drawn from the plan seed. A non-finite batch loss
/// aborts with a training error naming the epoch.
TrainResult train_classifier(Model& model, const std::vector<LabeledExample>& train_set,
                             const TrainPlan& plan);

/// Fraction of examples whose predicted class equals the label.
double classification_accuracy(const Model& model,
                               const std::vector<LabeledExample>& examples);

/// Stacks HxWxC examples into an [N,H,W,C] batch tensor.
Tensor stack_images(std::span<const LabeledExample> examples);
Tensor stack_images(std::span<const Tensor> images);

}  // namespace introspect
