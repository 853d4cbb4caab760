#include "introspect/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "introspect/error.hpp"
#include "introspect/math.hpp"

namespace introspect {

Tensor stack_images(std::span<const Tensor> images) {
  if (images.empty()) raise(ErrorCode::kContract, "stack_images: empty batch");
  const Tensor& first = images[0];
  std::vector<int> shape = {static_cast<int>(images.size())};
  for (int i = 0; i < first.rank(); ++i) shape.push_back(first.dim(i));
  Tensor out(std::move(shape));
  const std::size_t stride = first.size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i].same_shape(first)) {
      raise(ErrorCode::kDimension, "stack_images: example " + std::to_string(i) + " has shape " +
                                       images[i].shape_str() + ", expected " + first.shape_str());
    }
    std::copy(images[i].values().begin(), images[i].values().end(), out.data() + i * stride);
  }
  return out;
}

Tensor stack_images(std::span<const LabeledExample> examples) {
  std::vector<Tensor> imgs;
  imgs.reserve(examples.size());
  for (const LabeledExample& e : examples) imgs.push_back(e.image);
  return stack_images(imgs);
}

TrainResult train_classifier(Model& model, const std::vector<LabeledExample>& train_set,
                             const TrainPlan& plan) {
  if (plan.epochs < 1) raise(ErrorCode::kConfig, "train: epochs must be >= 1");
  if (plan.batch_size < 1) raise(ErrorCode::kConfig, "train: batch_size must be >= 1");
  if (train_set.empty()) raise(ErrorCode::kConfig, "train: empty training set");
  for (const LabeledExample& e : train_set) {
    if (!e.label) raise(ErrorCode::kContract, "train: unlabeled example in training set");
  }

  SeededRng shuffle_rng = SeededRng(plan.seed).derive("shuffle");
  SeededRng augment_rng = SeededRng(plan.seed).derive("augment");
  SeededRng dropout_rng = SeededRng(plan.seed).derive("dropout");

  RmsPropState optimizer(plan.optimizer);
  const auto param_names = model.trainable_param_names();

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < plan.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0, correct = 0;

    for (std::size_t start = 0; start < order.size(); start += plan.batch_size) {
      const std::size_t count = std::min<std::size_t>(plan.batch_size, order.size() - start);
      std::vector<Tensor> images;
      std::vector<int> labels;
      images.reserve(count);
      labels.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        const LabeledExample& e = train_set[order[start + i]];
        images.push_back(plan.augment.enabled() ? augment(e.image, augment_rng, plan.augment)
                                                : e.image);
        labels.push_back(*e.label);
      }

      Tape tape;
      ValueId input = tape.leaf(stack_images(images), false);
      ForwardOptions opt;
      opt.training = true;
      opt.params_require_grad = true;
      opt.dropout_rng = &dropout_rng;
      std::vector<ValueId> param_ids;
      ValueId logits = model.forward(tape, input, opt, &param_ids);
      ValueId loss = tape.softmax_cross_entropy(logits, labels);

      const float batch_loss = tape.value(loss).at(0);
      if (!std::isfinite(batch_loss)) {
        raise(ErrorCode::kTraining,
              "train: loss diverged (non-finite) at epoch " + std::to_string(epoch));
      }
      epoch_loss += static_cast<double>(batch_loss) * static_cast<double>(count);

      const Tensor& lv = tape.value(logits);
      const int k = lv.dim(1);
      for (std::size_t i = 0; i < count; ++i) {
        const int pred = argmax(std::span<const float>(lv.data() + i * k, static_cast<std::size_t>(k)));
        if (pred == labels[i]) ++correct;
      }
      seen += count;

      auto grads = tape.gradients(loss, param_ids);
      std::vector<Tensor*> params;
      params.reserve(param_names.size());
      for (const std::string& name : param_names) params.push_back(&model.weights().at(name));
      optimizer.step(params, grads);
    }

    EpochStats stats;
    stats.loss = static_cast<float>(epoch_loss / static_cast<double>(seen));
    stats.accuracy = static_cast<float>(static_cast<double>(correct) / static_cast<double>(seen));
    result.history.push_back(stats);
    if (plan.verbose) {
      std::fprintf(stderr, "epoch %d/%d  loss %.4f  acc %.4f\n", epoch + 1, plan.epochs,
                   stats.loss, stats.accuracy);
    }
  }
  return result;
}

double classification_accuracy(const Model& model,
                               const std::vector<LabeledExample>& examples) {
  if (examples.empty()) raise(ErrorCode::kContract, "accuracy: empty example set");
  const Tensor logits = predict_logits(model, stack_images(examples));
  const std::vector<int> preds = predicted_classes(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!examples[i].label) raise(ErrorCode::kContract, "accuracy: unlabeled example");
    if (preds[i] == *examples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace introspect
