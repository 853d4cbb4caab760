#pragma once

#include <span>
#include <vector>

#include "introspect/logit_record.hpp"
#include "introspect/model.hpp"
#include "introspect/optimizer.hpp"

namespace introspect {

/// max(softmax(logits)): the thresholding baseline. Lies in [1/K, 1] and is
/// invariant to shifting all logits by a constant.
float softmax_baseline_score(std::span<const float> logits);

struct TrustScoreConfig {
  int k = 10;          // neighbor count for the density radius
  float alpha = 0.05f; // fraction of each class discarded as low-density
};

/// Per-class point sets after density filtering: each point's radius is the
/// distance to its k-th nearest neighbor within its class (counting the
/// point itself), and the floor(alpha*n) largest-radius points are dropped.
/// The score of (x, predicted) is
///   d(x, nearest kept point of any other class) / d(x, nearest kept point
///   of the predicted class),
/// with a large sentinel when the denominator is zero.
class TrustScoreIndex {
 public:
  static constexpr float kSentinel = 1e12f;

  static TrustScoreIndex fit(const std::vector<std::vector<float>>& points,
                             const std::vector<int>& labels, const TrustScoreConfig& config);

  float score(std::span<const float> x, int predicted) const;

  int class_count() const { return static_cast<int>(class_points_.size()); }
  std::size_t dimension() const { return dimension_; }
  /// Kept points of one class, row-major [count x dimension].
  const std::vector<float>& class_points(int cls) const;
  std::size_t class_size(int cls) const;

 private:
  std::vector<std::vector<float>> class_points_;
  std::size_t dimension_ = 0;
};

struct IntrospectionConfig {
  int epochs = 60;
  int batch_size = 64;
  RmsPropConfig optimizer;  // lr 0.001
  std::uint64_t seed = 0;
  bool verbose = false;
};

/// dense(128)+relu -> dropout(20%) -> dense(128)+relu -> dropout(20%) ->
/// batchnorm -> dense(1), the regressor that reads confidence out of raw
/// logit vectors.
ModelSpec introspection_net_spec(int num_classes);

struct IntrospectionTrainResult {
  Model model;
  std::vector<float> val_loss_history;  // one entry per epoch
};

/// Trains the regressor on (logits -> correct bit) pairs with MSE loss.
/// Records must all share the logit width; targets are the correct bits.
IntrospectionTrainResult train_introspection(const std::vector<LogitRecord>& train_records,
                                             const std::vector<LogitRecord>& val_records,
                                             const IntrospectionConfig& config);

/// Raw regression output, unclamped; detection metrics are rank-based so
/// clamping would only merge ties.
float introspection_score(const Model& model, std::span<const float> logits);

/// Batch scoring: one score per row of [N,K].
std::vector<float> introspection_scores(const Model& model, const Tensor& logits_nk);

}  // namespace introspect
