#include "introspect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "introspect/error.hpp"

namespace introspect {

namespace {

void require_both_classes(std::span<const ScoredExample> scored, const char* metric) {
  std::size_t pos = 0, neg = 0;
  for (const ScoredExample& s : scored) {
    if (!std::isfinite(s.score)) {
      raise(ErrorCode::kContract, std::string(metric) + ": non-finite score");
    }
    (s.is_positive ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) {
    raise(ErrorCode::kMetricUndefined, std::string(metric) +
                                           ": need at least one positive and one negative (got " +
                                           std::to_string(pos) + "/" + std::to_string(neg) + ")");
  }
}

}  // namespace

double auroc(std::span<const ScoredExample> scored) {
  require_both_classes(scored, "auroc");
  const std::size_t n = scored.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scored[a].score < scored[b].score; });

  // Average ranks across tie groups, then the rank-sum statistic.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scored[order[j]].score == scored[order[i]].score) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t t = i; t < j; ++t) {
      if (scored[order[t]].is_positive) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aupr(std::span<const ScoredExample> scored, PositiveClass positive) {
  require_both_classes(scored, "aupr");
  std::vector<ScoredExample> v(scored.begin(), scored.end());
  if (positive == PositiveClass::kOut) {
    for (ScoredExample& s : v) {
      s.score = -s.score;
      s.is_positive = !s.is_positive;
    }
  }
  std::sort(v.begin(), v.end(), [](const ScoredExample& a, const ScoredExample& b) {
    return a.score > b.score;
  });

  std::size_t total_pos = 0;
  for (const ScoredExample& s : v) total_pos += s.is_positive ? 1 : 0;

  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) ++j;
    for (std::size_t t = i; t < j; ++t) (v[t].is_positive ? tp : fp) += 1;
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double fpr_at_tpr(std::span<const ScoredExample> scored, double tpr_target) {
  require_both_classes(scored, "fpr_at_tpr");
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) {
    raise(ErrorCode::kConfig, "fpr_at_tpr: target must be in (0,1]");
  }
  std::vector<ScoredExample> v(scored.begin(), scored.end());
  std::sort(v.begin(), v.end(), [](const ScoredExample& a, const ScoredExample& b) {
    return a.score > b.score;
  });
  std::size_t total_pos = 0;
  for (const ScoredExample& s : v) total_pos += s.is_positive ? 1 : 0;
  const std::size_t total_neg = v.size() - total_pos;

  // Walk unique thresholds from high to low; the first (largest) threshold
  // reaching the target is the answer.
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) ++j;
    for (std::size_t t = i; t < j; ++t) (v[t].is_positive ? tp : fp) += 1;
    const double tpr = static_cast<double>(tp) / static_cast<double>(total_pos);
    if (tpr >= tpr_target) {
      return static_cast<double>(fp) / static_cast<double>(total_neg);
    }
    i = j;
  }
  return 1.0;  // even the lowest threshold misses the target (unreachable: tpr hits 1)
}

EvalReport evaluate_detector(const std::string& detector, DatasetTag dataset,
                             std::span<const ScoredExample> scored) {
  EvalReport r;
  r.detector = detector;
  r.dataset = dataset;
  r.fpr_at_95_tpr = fpr_at_tpr(scored, 0.95);
  r.auroc = auroc(scored);
  r.aupr_in = aupr(scored, PositiveClass::kIn);
  r.aupr_out = aupr(scored, PositiveClass::kOut);
  return r;
}

}  // namespace introspect
