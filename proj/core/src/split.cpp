#include "introspect/split.hpp"

#include <cmath>
#include <numeric>

#include "introspect/error.hpp"
#include "introspect/rng.hpp"

namespace introspect {

DetectionSplit assemble_detection_split(
    const std::map<DatasetTag, std::vector<LabeledExample>>& sources, const SplitSpec& spec) {
  if (!(spec.val_fraction > 0.0 && spec.val_fraction < 1.0)) {
    raise(ErrorCode::kConfig, "split: val_fraction must be in (0,1), got " +
                                  std::to_string(spec.val_fraction));
  }
  if (spec.n_in_dist < 1 || spec.n_per_misclass < 0 || spec.n_test_per_dataset < 0) {
    raise(ErrorCode::kConfig, "split: counts must be non-negative (n_in_dist >= 1)");
  }

  DetectionSplit out;
  SeededRng rng(spec.seed);

  for (const auto& [tag, pool] : sources) {
    const int n_fit = tag == DatasetTag::kInDist ? spec.n_in_dist : spec.n_per_misclass;
    const int n_test = spec.n_test_per_dataset;
    const std::size_t need = static_cast<std::size_t>(n_fit) + n_test;
    if (pool.size() < need) {
      raise(ErrorCode::kShortfall, std::string("split: dataset '") + tag_name(tag) + "' has " +
                                       std::to_string(pool.size()) + " examples but needs " +
                                       std::to_string(need));
    }

    SeededRng tag_rng = rng.derive(tag_name(tag));
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    tag_rng.shuffle(order);

    const int n_val = static_cast<int>(std::lround(static_cast<double>(n_fit) * spec.val_fraction));
    for (int i = 0; i < n_fit; ++i) {
      const std::size_t idx = order[static_cast<std::size_t>(i)];
      if (i < n_fit - n_val) {
        out.train.push_back(pool[idx]);
        out.train_refs.push_back(SourceRef{tag, idx});
      } else {
        out.val.push_back(pool[idx]);
        out.val_refs.push_back(SourceRef{tag, idx});
      }
    }
    for (int i = 0; i < n_test; ++i) {
      const std::size_t idx = order[static_cast<std::size_t>(n_fit + i)];
      out.test.push_back(pool[idx]);
      out.test_refs.push_back(SourceRef{tag, idx});
    }
  }
  return out;
}

}  // namespace introspect
