#pragma once

#include <span>
#include <string>
#include <vector>

#include "introspect/data.hpp"

namespace introspect {

/// One scored prediction for threshold-free evaluation; positive means
/// "correctly classified in-distribution".
struct ScoredExample {
  double score = 0.0;
  bool is_positive = false;
};

/// Mann-Whitney AUROC via average rank sums: P(score+ > score-) with ties
/// counting one half. Needs at least one positive and one negative.
double auroc(std::span<const ScoredExample> scored);

enum class PositiveClass { kIn, kOut };

/// Step-wise average precision over descending unique thresholds,
/// sum of (R_n - R_{n-1}) * P_n. kOut flips the labels and negates the
/// scores so "detect the misclassification" is scored symmetrically.
double aupr(std::span<const ScoredExample> scored, PositiveClass positive);

/// FPR at the largest threshold t (score >= t predicts positive, no
/// interpolation) whose TPR reaches the target.
double fpr_at_tpr(std::span<const ScoredExample> scored, double tpr_target = 0.95);

struct EvalReport {
  std::string detector;
  DatasetTag dataset = DatasetTag::kErrors;
  double fpr_at_95_tpr = 0.0;
  double auroc = 0.0;
  double aupr_in = 0.0;
  double aupr_out = 0.0;
};

/// All four detection metrics for one (detector, dataset) pair.
EvalReport evaluate_detector(const std::string& detector, DatasetTag dataset,
                             std::span<const ScoredExample> scored);

}  // namespace introspect
